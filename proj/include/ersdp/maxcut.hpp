#ifndef ERSDP_MAXCUT_HPP_
#define ERSDP_MAXCUT_HPP_

#include "ersdp/dualsolve.hpp"
#include "ersdp/eigs.hpp"

#include <cstdint>

namespace ersdp {

/// Max-Cut in minimization form: minimize x^T C x over x in {-1, 1}^n,
/// with C = A / n.
struct MaxCutInstance {
  MatrixPtr adjacency;
  MatrixPtr cost;
  Index n = 0;

  /// Sum of edge weights, each undirected edge counted once.
  double total_weight() const;
  /// Weight of edges cut by x, from the objective value x^T C x.
  double cut_from_objective(double value) const;
};

MaxCutInstance make_maxcut_instance(SparseSymMatrixd adjacency);

/// G(n, p): each unordered pair independently with probability p.
MaxCutInstance erdos_renyi(Index n, double p, std::uint64_t seed);

struct LowerBound {
  double lower = 0;  // 1.lambda + n mu
  double mu = 0;     // smallest eigenvalue of C - diag(lambda)
  EigResultd eig;
};

/// Certified lower bound from any lambda: shift by the smallest eigenvalue
/// of C - diag(lambda) so that lambda + mu 1 is dual feasible.
LowerBound lower_bound(const MaxCutInstance& instance, const VectorXd& lambda, double eig_tol = kDefaultEigTol,
                       Index eig_max_iter = kDefaultEigMaxIter, std::uint64_t seed = 0);

struct Rounding {
  Eigen::VectorXi x;  // entries in {-1, +1}
  double value = 0;   // x^T C x
};

/// x = sign(Y z) for one Gaussian probe z keyed by (seed, iteration); sign(0) = +1.
Rounding gw_round(const GibbsFactorOperatord& Y, const SparseSymMatrixd& C, std::uint64_t seed,
                  std::uint64_t iteration);

struct UpperBound {
  double mean = 0;
  double best = 0;
  Index samples = 0;
};

/// Mean and minimum of gw_round over samples s = 0 .. samples-1.
UpperBound expected_upper_bound(const GibbsFactorOperatord& Y, const SparseSymMatrixd& C, Index samples,
                                std::uint64_t seed);

inline constexpr double kGoemansWilliamsonAlpha = 0.878;

struct BoundsReport {
  double lower = 0;
  double upper_expected = 0;
  double upper_best = 0;
  /// Expected rounded cut over the cut certified by `lower`.
  double ratio = 0;
  /// upper_expected / lower: the same comparison on objective values.
  double objective_ratio = 0;
  double shift_mu = 0;
  /// The same bound evaluated at the last raw iterate instead of the averaged one.
  double lower_last_iterate = 0;
  Index samples = 0;
  double eig_residual = 0;
};

struct MaxCutConfig {
  Index n = 256;
  double p = -1;  // negative: 3 / n
  double beta = 10;
  SolveConfig solve;
  Index samples = 1000;
  std::uint64_t seed = 0;
  double eig_tol = kDefaultEigTol;
  Index eig_max_iter = kDefaultEigMaxIter;
  /// Bound and round at the averaged iterate; false uses the last one.
  bool average_lambda = true;
};

struct MaxCutRun {
  MaxCutInstance instance;
  DiagonalSolution solution;
  BoundsReport bounds;
};

/// Seeds for the graph, solver, eigensolver and rounding, derived from one master seed.
struct MaxCutSeeds {
  std::uint64_t graph, solver, eig, rounding;
  static MaxCutSeeds derive(std::uint64_t master);
};

/// Solve with b = 1 on a given instance, then bound.
MaxCutRun run_maxcut(MaxCutInstance instance, const MaxCutConfig& config);
/// Generate G(n, p) from the master seed, then run_maxcut.
MaxCutRun run_maxcut_experiment(const MaxCutConfig& config);

/// Exhaustive minimum of x^T C x (test oracle, n <= 24).
double brute_force_min(const SparseSymMatrixd& C);

}  // namespace ersdp

#endif  // ERSDP_MAXCUT_HPP_
