#ifndef ERSDP_SKETCH_HPP_
#define ERSDP_SKETCH_HPP_

#include "ersdp/linop.hpp"
#include "ersdp/matfunc.hpp"

#include <cstdint>
#include <random>

namespace ersdp {

enum class ProbeDistribution { Gaussian, Rademacher };

/// Probe matrix Z together with the keys it was generated from.
template <typename Scalar>
struct ProbeBatch {
  Mat<Scalar> Z;
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  ProbeDistribution distribution = ProbeDistribution::Gaussian;

  Index batch_size() const { return Z.cols(); }
};

/// Engine keyed by (seed, iteration, column, stream). Each key owns an
/// independent std::mt19937_64, so any column can be regenerated alone.
inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t iteration, std::uint64_t column,
                                    std::uint64_t stream = 0) {
  auto lo = [](std::uint64_t v) { return std::uint32_t(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return std::uint32_t(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(iteration), hi(iteration), lo(column), hi(column), lo(stream), hi(stream)};
  return std::mt19937_64(seq);
}

template <typename Scalar>
Vec<Scalar> probe_column(Index n, std::uint64_t seed, std::uint64_t iteration, std::uint64_t column,
                         ProbeDistribution dist = ProbeDistribution::Gaussian) {
  auto eng = keyed_engine(seed, iteration, column);
  Vec<Scalar> z(n);
  if (dist == ProbeDistribution::Gaussian) {
    std::normal_distribution<Scalar> normal(0, 1);
    for (Index i = 0; i < n; ++i) z(i) = normal(eng);
  } else {
    for (Index i = 0; i < n; ++i) z(i) = (eng() >> 63) ? Scalar(1) : Scalar(-1);
  }
  return z;
}

template <typename Scalar = double>
ProbeBatch<Scalar> draw_probes(Index n, Index batch, std::uint64_t seed, std::uint64_t iteration,
                               ProbeDistribution dist = ProbeDistribution::Gaussian) {
  if (n < 1 || batch < 1) throw std::invalid_argument("draw_probes: need n >= 1 and batch >= 1");
  ProbeBatch<Scalar> p;
  p.Z.resize(n, batch);
  p.seed = seed;
  p.iteration = iteration;
  p.distribution = dist;
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < batch; ++c) p.Z.col(c) = probe_column<Scalar>(n, seed, iteration, std::uint64_t(c), dist);
  return p;
}

/// V = YZ, optionally W = YV, and the estimates built from them.
template <typename Scalar>
struct SketchResult {
  Mat<Scalar> V;
  Mat<Scalar> W;   // empty unless trace_pair_estimate
  Vec<Scalar> a;   // diagonal estimate, empty unless diag_estimate
  Scalar t1 = 0;   // estimate of Tr X
  Scalar t2 = 0;   // estimate of Tr X^2
};

/// a = (1/N) (V o V) 1_N with V = YZ; unbiased for diag X.
template <typename Scalar>
SketchResult<Scalar> diag_estimate(const GibbsFactorOperator<Scalar>& Y, const ProbeBatch<Scalar>& probes) {
  check_dims(Y.n(), probes.Z.rows(), "diag_estimate");
  SketchResult<Scalar> r;
  r.V = Y.apply(probes.Z);
  r.a = r.V.cwiseAbs2().rowwise().sum() / Scalar(probes.batch_size());
  r.t1 = r.a.sum();
  return r;
}

/// t1 = (1/N) 1^T (V o V) 1 and t2 = (1/N) 1^T (W o W) 1 with W = YV.
/// Whenever Y's spectrum lies in [0, 1], t1 >= t2 holds for every batch.
template <typename Scalar>
SketchResult<Scalar> trace_pair_estimate(const GibbsFactorOperator<Scalar>& Y, const ProbeBatch<Scalar>& probes) {
  check_dims(Y.n(), probes.Z.rows(), "trace_pair_estimate");
  SketchResult<Scalar> r;
  r.V = Y.apply(probes.Z);
  r.W = Y.apply(r.V);
  const Scalar inv_n = Scalar(1) / Scalar(probes.batch_size());
  r.t1 = r.V.squaredNorm() * inv_n;
  r.t2 = r.W.squaredNorm() * inv_n;
  return r;
}

template <typename Scalar>
struct CovarianceCheck {
  Mat<Scalar> empirical;
  Mat<Scalar> analytic;        // 2 X_ij^2 for the diagonal pattern
  Mat<Scalar> standard_error;  // of each empirical entry
  Vec<Scalar> mean;
};

/// Empirical covariance of single-probe diagonal estimates (Yz)^2 against
/// the analytic 2 Tr[A_i X A_j X] = 2 X_ij^2. Only for small n.
template <typename Scalar>
CovarianceCheck<Scalar> covariance_check(const GibbsFactorOperator<Scalar>& Y, const Mat<Scalar>& X, Index trials,
                                         std::uint64_t seed, Index cap = kDenseCap) {
  const Index n = Y.n();
  if (n > cap) throw std::invalid_argument("covariance_check: n exceeds dense cap");
  check_dims(n, X.rows(), "covariance_check");
  if (trials < 2) throw std::invalid_argument("covariance_check: need at least 2 trials");

  const ProbeBatch<Scalar> probes = draw_probes<Scalar>(n, trials, seed, 0);
  const Mat<Scalar> samples = Y.apply(probes.Z).cwiseAbs2();  // n x trials

  CovarianceCheck<Scalar> out;
  out.mean = samples.rowwise().mean();
  const Mat<Scalar> centered = samples.colwise() - out.mean;
  out.empirical = centered * centered.transpose() / Scalar(trials - 1);
  out.analytic = 2 * X.cwiseAbs2();
  out.standard_error.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Vec<Scalar> u = centered.row(i).cwiseProduct(centered.row(j)).transpose();
      const Scalar m = u.mean();
      const Scalar var = (u.array() - m).square().sum() / Scalar(trials - 1);
      out.standard_error(i, j) = std::sqrt(var / Scalar(trials));
    }
  }
  return out;
}

}  // namespace ersdp

#endif  // ERSDP_SKETCH_HPP_
