#ifndef ERSDP_EIGS_HPP_
#define ERSDP_EIGS_HPP_

#include "ersdp/errors.hpp"
#include "ersdp/linop.hpp"
#include "ersdp/sketch.hpp"

#include <Eigen/Eigenvalues>

namespace ersdp {

template <typename Scalar>
struct EigResult {
  Scalar eigenvalue = 0;
  Vec<Scalar> eigenvector;
  Scalar residual_norm = 0;
  Index iterations = 0;
};

using EigResultd = EigResult<double>;

/// Carries the best iterate when min_eigenpair gives up.
template <typename Scalar>
class EigConvergenceError : public ConvergenceError {
 public:
  EigConvergenceError(const std::string& what, EigResult<Scalar> best)
      : ConvergenceError(what, double(best.residual_norm)), best_(std::move(best)) {}
  const EigResult<Scalar>& best() const { return best_; }

 private:
  EigResult<Scalar> best_;
};

inline constexpr double kDefaultEigTol = 1e-8;
inline constexpr Index kDefaultEigMaxIter = 2000;

namespace detail {

// Orthonormalizes the columns of S in place (two Gram-Schmidt passes),
// dropping columns that are numerically dependent on earlier ones.
template <typename Scalar>
Mat<Scalar> orthonormal_columns(const Mat<Scalar>& S) {
  Mat<Scalar> Q(S.rows(), S.cols());
  Index kept = 0;
  for (Index j = 0; j < S.cols(); ++j) {
    Vec<Scalar> v = S.col(j);
    const Scalar original = v.norm();
    if (original == 0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i < kept; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    const Scalar nv = v.norm();
    if (nv <= Scalar(1e-10) * original) continue;
    Q.col(kept++) = v / nv;
  }
  return Q.leftCols(kept);
}

}  // namespace detail

/// Smallest eigenpair of a symmetric operator by single-vector LOBPCG:
/// Rayleigh-Ritz on span{x, r, p} each step, no preconditioner. Converged
/// once ||Hx - rho x|| <= tol * max(|B1|, |B2|, |rho|) with [B1, B2] the
/// Gershgorin interval.
template <typename Scalar>
EigResult<Scalar> min_eigenpair(const DualShiftedOperator<Scalar>& op, Scalar tol = Scalar(kDefaultEigTol),
                                Index max_iter = kDefaultEigMaxIter, std::uint64_t seed = 0) {
  if (!(tol > 0)) throw std::invalid_argument("min_eigenpair: tol must be positive");
  const Index n = op.n();
  if (n == 0) throw std::invalid_argument("min_eigenpair: empty operator");

  const SpectralInterval<Scalar> iv = gershgorin_interval(op);
  const Scalar scale = std::max({std::abs(iv.lower), std::abs(iv.upper), std::numeric_limits<Scalar>::min()});

  Vec<Scalar> x = probe_column<Scalar>(n, seed, 0, 0);
  x.normalize();
  Vec<Scalar> hx = op.apply(x);
  Vec<Scalar> p;

  EigResult<Scalar> best;
  best.residual_norm = std::numeric_limits<Scalar>::infinity();
  for (Index it = 0; it <= max_iter; ++it) {
    const Scalar rho = x.dot(hx);
    const Vec<Scalar> r = hx - rho * x;
    const Scalar rn = r.norm();
    if (rn < best.residual_norm || it == 0) best = {rho, x, rn, it};
    if (rn <= tol * std::max(scale, std::abs(rho))) return best;
    if (it == max_iter) break;

    Mat<Scalar> S(n, p.size() ? 3 : 2);
    S.col(0) = x;
    S.col(1) = r;
    if (p.size()) S.col(2) = p;
    const Mat<Scalar> Q = detail::orthonormal_columns<Scalar>(S);
    const Mat<Scalar> HQ = op.apply(Q);
    Mat<Scalar> G = Q.transpose() * HQ;
    G = (G + G.transpose()).eval() / 2;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(G);
    const Vec<Scalar> y = es.eigenvectors().col(0);

    Vec<Scalar> x_new = Q * y;
    Vec<Scalar> hx_new = HQ * y;
    // search direction: the part of the update orthogonal to the old iterate
    p = x_new - x.dot(x_new) * x;
    const Scalar pn = p.norm();
    if (pn > 0)
      p /= pn;
    else
      p.resize(0);

    const Scalar xn = x_new.norm();
    x = x_new / xn;
    // refresh Hx now and then so rounding in the recombination cannot build up
    hx = (it % 25 == 24) ? op.apply(x) : Vec<Scalar>(hx_new / xn);
    if (!x.allFinite()) throw NumericalError("min_eigenpair: non-finite iterate");
  }
  throw EigConvergenceError<Scalar>("min_eigenpair: no convergence in " + std::to_string(max_iter) + " iterations",
                                    best);
}

}  // namespace ersdp

#endif  // ERSDP_EIGS_HPP_
