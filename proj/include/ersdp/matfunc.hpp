#ifndef ERSDP_MATFUNC_HPP_
#define ERSDP_MATFUNC_HPP_

#include "ersdp/errors.hpp"
#include "ersdp/linop.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>

namespace ersdp {

/// 1 / (1 + e^{beta x}), without overflow for either sign of x.
template <typename Scalar>
Scalar fermi_dirac(Scalar x, Scalar beta) {
  const Scalar y = beta * x;
  if (y > 0) {
    const Scalar e = std::exp(-y);
    return e / (1 + e);
  }
  return 1 / (1 + std::exp(y));
}

/// 1 / sqrt(1 + e^{beta x}). For x > 0 evaluated as e^{-beta x/2} / sqrt(1 + e^{-beta x}).
template <typename Scalar>
Scalar fermi_dirac_sqrt(Scalar x, Scalar beta) {
  const Scalar y = beta * x;
  if (y > 0) return std::exp(-y / 2) / std::sqrt(1 + std::exp(-y));
  return 1 / std::sqrt(1 + std::exp(y));
}

/// log(1 + e^{y}) without overflow.
template <typename Scalar>
Scalar softplus(Scalar y) {
  return y > 0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

/// Chebyshev expansion sum_k c_k T_k((2x - a - b) / (b - a)) on [a, b].
template <typename Scalar>
struct ChebApprox {
  Scalar a = -1;
  Scalar b = 1;
  Vec<Scalar> coeffs;
  /// Largest deviation from the target seen on the uniform check grid.
  Scalar sup_error = 0;

  Index degree() const { return coeffs.size() - 1; }

  Scalar operator()(Scalar x) const {
    const Scalar u = (2 * x - a - b) / (b - a);
    // three-term recurrence, same order as cheb_apply
    Scalar t0 = 1, acc = coeffs(0) * t0;
    if (coeffs.size() == 1) return acc;
    Scalar t1 = u;
    acc += coeffs(1) * t1;
    for (Index k = 2; k < coeffs.size(); ++k) {
      const Scalar t2 = 2 * u * t1 - t0;
      acc += coeffs(k) * t2;
      t0 = t1;
      t1 = t2;
    }
    return acc;
  }
};

using ChebApproxd = ChebApprox<double>;

inline constexpr Index kChebGridPoints = 10000;
inline constexpr Index kChebMaxDegree = 4096;

/// Point i of the M-point uniform grid on [a, b].
template <typename Scalar>
Scalar uniform_grid_point(Scalar a, Scalar b, Index i, Index m = kChebGridPoints) {
  return a + (b - a) * Scalar(i) / Scalar(m - 1);
}

namespace detail {

template <typename Scalar>
Vec<Scalar> cheb_interpolate(const std::function<Scalar(Scalar)>& f, Scalar a, Scalar b, Index degree) {
  const Index m = degree + 1;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Vec<Scalar> fx(m);
  for (Index j = 0; j < m; ++j) {
    const Scalar u = std::cos(pi * (Scalar(j) + Scalar(0.5)) / Scalar(m));
    fx(j) = f((a + b) / 2 + (b - a) / 2 * u);
  }
  Vec<Scalar> c(m);
  for (Index k = 0; k < m; ++k) {
    Scalar s = 0;
    for (Index j = 0; j < m; ++j) s += fx(j) * std::cos(pi * Scalar(k) * (Scalar(j) + Scalar(0.5)) / Scalar(m));
    c(k) = 2 * s / Scalar(m);
  }
  c(0) /= 2;
  return c;
}

template <typename Scalar>
Scalar grid_error(const ChebApprox<Scalar>& p, const Vec<Scalar>& fgrid) {
  Scalar err = 0;
  for (Index i = 0; i < fgrid.size(); ++i)
    err = std::max(err, std::abs(p(uniform_grid_point(p.a, p.b, i, fgrid.size())) - fgrid(i)));
  return err;
}

}  // namespace detail

/// Adaptive Chebyshev interpolation of f on [a, b].
///
/// The degree doubles from 1 until the interpolant is within tol/4 of f on a
/// 10^4-point uniform grid, then trailing coefficients whose absolute sum is
/// below tol/4 are dropped. Throws ConvergenceError past `max_degree`.
template <typename Scalar>
ChebApprox<Scalar> cheb_fit(const std::function<Scalar(Scalar)>& f, Scalar a, Scalar b, Scalar tol,
                            Index max_degree = kChebMaxDegree) {
  if (!(b > a)) throw std::invalid_argument("cheb_fit: need a < b");
  if (!(tol > 0)) throw std::invalid_argument("cheb_fit: tol must be positive");

  Vec<Scalar> fgrid(kChebGridPoints);
  for (Index i = 0; i < kChebGridPoints; ++i) fgrid(i) = f(uniform_grid_point(a, b, i));

  ChebApprox<Scalar> p{a, b, {}, 0};
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index degree = 1; degree <= max_degree; degree *= 2) {
    p.coeffs = detail::cheb_interpolate(f, a, b, degree);
    const Scalar err = detail::grid_error(p, fgrid);
    best = std::min(best, err);
    if (err > tol / 4) continue;

    Index keep = p.coeffs.size();
    Scalar tail = 0;
    while (keep > 1 && tail + std::abs(p.coeffs(keep - 1)) <= tol / 4) tail += std::abs(p.coeffs(--keep));
    p.coeffs.conservativeResize(keep);
    p.sup_error = detail::grid_error(p, fgrid);
    return p;
  }
  throw ConvergenceError("cheb_fit: degree cap " + std::to_string(max_degree) + " exceeded", double(best));
}

/// sum_k c_k T_k(Hhat) V with Hhat the operator mapped affinely from
/// [a, b] onto [-1, 1]. Uses the explicit three-term recurrence, one
/// operator application per degree.
template <typename Scalar>
Mat<Scalar> cheb_apply(const ChebApprox<Scalar>& p, const DualShiftedOperator<Scalar>& op, const Mat<Scalar>& V) {
  check_dims(op.n(), V.rows(), "cheb_apply");
  Mat<Scalar> acc = p.coeffs(0) * V;
  if (p.coeffs.size() == 1) return acc;

  const Scalar center = (p.a + p.b) / 2;
  const Scalar scale = 2 / (p.b - p.a);
  Mat<Scalar> t0 = V;
  Mat<Scalar> t1(V.rows(), V.cols());
  Mat<Scalar> hv(V.rows(), V.cols());

  op.apply_to(t0, hv);
  t1 = scale * (hv - center * t0);
  acc += p.coeffs(1) * t1;
  for (Index k = 2; k < p.coeffs.size(); ++k) {
    op.apply_to(t1, hv);
    // t0 <- 2 Hhat t1 - t0, then swap so t1 holds T_k
    t0 = 2 * scale * (hv - center * t1) - t0;
    t0.swap(t1);
    acc += p.coeffs(k) * t1;
  }
  return acc;
}

/// e^{tH} V by scaling and truncated Taylor stages.
///
/// The Gershgorin interval [c - r, c + r] of H gives s = ceil(|t| r) stages
/// of e^{(t/s)(H - cI)}, each multiplied by e^{tc/s}. A stage stops adding
/// terms once two consecutive terms are below tol/s of the partial sum,
/// column by column.
template <typename Scalar>
Mat<Scalar> expmv(const DualShiftedOperator<Scalar>& op, const Mat<Scalar>& V, Scalar t, Scalar tol,
                  std::optional<SpectralInterval<Scalar>> interval = std::nullopt) {
  check_dims(op.n(), V.rows(), "expmv");
  if (!(tol > 0)) throw std::invalid_argument("expmv: tol must be positive");
  if (t == 0 || V.size() == 0) return V;

  const SpectralInterval<Scalar> iv = interval ? *interval : gershgorin_interval(op);
  const Scalar center = iv.center();
  const Scalar norm_bound = std::abs(t) * iv.radius();
  const Index stages = std::max<Index>(1, Index(std::ceil(norm_bound)));
  const Scalar h = t / Scalar(stages);
  const Scalar stage_factor = std::exp(h * center);
  const Scalar stage_tol = tol / Scalar(stages);
  constexpr Index kMaxTerms = 64;

  Mat<Scalar> B = V;
  Mat<Scalar> term(V.rows(), V.cols());
  Mat<Scalar> hv(V.rows(), V.cols());
  Vec<Scalar> prev_norm(V.cols());
  for (Index stage = 0; stage < stages; ++stage) {
    Mat<Scalar> F = B;
    term = B;
    prev_norm = term.cwiseAbs().colwise().maxCoeff().transpose();
    bool done = false;
    for (Index j = 1; j <= kMaxTerms && !done; ++j) {
      op.apply_to(term, hv);
      term = (h / Scalar(j)) * (hv - center * term);
      F += term;
      done = true;
      for (Index c = 0; c < V.cols(); ++c) {
        const Scalar tn = term.col(c).cwiseAbs().maxCoeff();
        const Scalar fn = F.col(c).cwiseAbs().maxCoeff();
        if (tn + prev_norm(c) > stage_tol * fn) done = false;
        prev_norm(c) = tn;
      }
    }
    if (!done) throw ConvergenceError("expmv: Taylor series did not converge", double(prev_norm.maxCoeff()));
    B = stage_factor * F;
    if (!B.allFinite()) throw NumericalError("expmv: non-finite intermediate (check spectral bounds)");
  }
  return B;
}

enum class GibbsKind { HalfExponential, SqrtFermiDirac };

inline constexpr double kDefaultExpmvTol = 1e-8;
inline constexpr double kDefaultChebTol = 1e-5;

/// Matvec-capable Y with X = Y^2:
///   HalfExponential: Y = exp(-(beta/2) H)
///   SqrtFermiDirac:  Y = (1 + exp(beta H))^{-1/2}
/// where H = C - lambda.A.
template <typename Scalar>
class GibbsFactorOperator {
 public:
  using Op = DualShiftedOperator<Scalar>;

  static GibbsFactorOperator half_exponential(Op shifted, Scalar beta, Scalar tol = Scalar(kDefaultExpmvTol)) {
    check_beta(beta);
    GibbsFactorOperator g(std::move(shifted), beta, GibbsKind::HalfExponential, tol);
    g.interval_ = gershgorin_interval(g.shifted_);
    return g;
  }

  /// `interval` must enclose the spectrum of `shifted`.
  static GibbsFactorOperator sqrt_fermi_dirac(Op shifted, Scalar beta, SpectralInterval<Scalar> interval,
                                              Scalar tol = Scalar(kDefaultChebTol)) {
    check_beta(beta);
    auto approx = std::make_shared<const ChebApprox<Scalar>>(fit_sqrt_fermi_dirac(beta, interval, tol));
    return sqrt_fermi_dirac(std::move(shifted), beta, std::move(approx));
  }

  /// Reuses an existing expansion; its interval must enclose the spectrum.
  static GibbsFactorOperator sqrt_fermi_dirac(Op shifted, Scalar beta,
                                              std::shared_ptr<const ChebApprox<Scalar>> approx) {
    check_beta(beta);
    if (!approx) throw std::invalid_argument("GibbsFactorOperator: null Chebyshev expansion");
    GibbsFactorOperator g(std::move(shifted), beta, GibbsKind::SqrtFermiDirac, approx->sup_error);
    g.interval_ = {approx->a, approx->b};
    g.cheb_ = std::move(approx);
    return g;
  }

  static ChebApprox<Scalar> fit_sqrt_fermi_dirac(Scalar beta, SpectralInterval<Scalar> interval, Scalar tol) {
    return cheb_fit<Scalar>([beta](Scalar x) { return fermi_dirac_sqrt(x, beta); }, interval.lower,
                            interval.upper, tol);
  }

  Index n() const { return shifted_.n(); }
  Scalar beta() const { return beta_; }
  GibbsKind kind() const { return kind_; }
  const Op& shifted() const { return shifted_; }
  const SpectralInterval<Scalar>& interval() const { return interval_; }
  const ChebApprox<Scalar>* cheb() const { return cheb_.get(); }

  Mat<Scalar> apply(const Mat<Scalar>& V) const {
    if (kind_ == GibbsKind::HalfExponential) return expmv<Scalar>(shifted_, V, -beta_ / 2, tol_, interval_);
    return cheb_apply(*cheb_, shifted_, V);
  }

 private:
  GibbsFactorOperator(Op shifted, Scalar beta, GibbsKind kind, Scalar tol)
      : shifted_(std::move(shifted)), beta_(beta), kind_(kind), tol_(tol) {}

  static void check_beta(Scalar beta) {
    if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("GibbsFactorOperator: beta must be > 0");
  }

  Op shifted_;
  Scalar beta_;
  GibbsKind kind_;
  Scalar tol_;
  SpectralInterval<Scalar> interval_;
  std::shared_ptr<const ChebApprox<Scalar>> cheb_;
};

using GibbsFactorOperatord = GibbsFactorOperator<double>;

inline constexpr Index kDenseCap = 512;

/// Exact quantities from a full eigendecomposition of H = C - lambda.A.
template <typename Scalar>
struct DenseGibbs {
  Vec<Scalar> eigenvalues;  // of H, ascending
  Mat<Scalar> eigenvectors;
  Mat<Scalar> X;
  Mat<Scalar> Y;
  Scalar trace_X = 0;
  Scalar trace_X2 = 0;
  Scalar trace_exp = 0;        // Tr exp(-beta H)
  Scalar trace_log1p_exp = 0;  // Tr log(1 + exp(-beta H))
  Scalar entropy = 0;          // Tr[X log X - X]
  Scalar binary_entropy = 0;   // Tr[X log X + (I - X) log(I - X)]
};

template <typename Scalar>
DenseGibbs<Scalar> dense_reference(const DualShiftedOperator<Scalar>& op, Scalar beta, GibbsKind kind,
                                   Index cap = kDenseCap) {
  if (op.n() > cap)
    throw std::invalid_argument("dense_reference: n = " + std::to_string(op.n()) + " exceeds cap " +
                                std::to_string(cap));
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(op.to_dense());
  if (es.info() != Eigen::Success) throw NumericalError("dense_reference: eigendecomposition failed");

  DenseGibbs<Scalar> out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  const Index n = op.n();
  Vec<Scalar> x(n), y(n);
  auto xlogx = [](Scalar v) { return v > 0 ? v * std::log(v) : Scalar(0); };
  for (Index i = 0; i < n; ++i) {
    const Scalar h = out.eigenvalues(i);
    if (kind == GibbsKind::HalfExponential) {
      x(i) = std::exp(-beta * h);
      y(i) = std::exp(-beta * h / 2);
    } else {
      x(i) = fermi_dirac(h, beta);
      y(i) = fermi_dirac_sqrt(h, beta);
    }
    out.trace_exp += std::exp(-beta * h);
    out.trace_log1p_exp += softplus(-beta * h);
    out.entropy += xlogx(x(i)) - x(i);
    out.binary_entropy += xlogx(x(i)) + xlogx(1 - x(i));
  }
  out.trace_X = x.sum();
  out.trace_X2 = x.squaredNorm();
  out.X = out.eigenvectors * x.asDiagonal() * out.eigenvectors.transpose();
  out.Y = out.eigenvectors * y.asDiagonal() * out.eigenvectors.transpose();
  return out;
}

}  // namespace ersdp

#endif  // ERSDP_MATFUNC_HPP_
