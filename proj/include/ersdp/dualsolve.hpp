#ifndef ERSDP_DUALSOLVE_HPP_
#define ERSDP_DUALSOLVE_HPP_

#include "ersdp/linop.hpp"
#include "ersdp/matfunc.hpp"
#include "ersdp/sketch.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ersdp {

using MatrixPtr = std::shared_ptr<const SparseSymMatrixd>;

/// minimize Tr[CX] + S(X)/beta  subject to  diag(X) = b.
struct DiagonalProblem {
  MatrixPtr C;
  VectorXd b;
  double beta = 1;

  void validate() const;
};

/// minimize Tr[CX] + S_bin(X)/beta  subject to  Tr X = k,  0 < X < I.
struct TraceProblem {
  MatrixPtr C;
  double k = 1;
  double beta = 1;
  SpectralInterval<double> interval;  // encloses the spectrum of C

  void validate() const;
};

enum class SolveMode { Stochastic, Exact };

struct SolveConfig {
  Index batch = 8;
  Index iters = 400;
  std::uint64_t seed = 0;
  SolveMode mode = SolveMode::Stochastic;
  ProbeDistribution distribution = ProbeDistribution::Gaussian;
  double expmv_tol = kDefaultExpmvTol;
  double cheb_tol = kDefaultChebTol;
  Index dense_cap = kDenseCap;
  /// Keep a copy of lambda after every iteration (diagonal solver only).
  bool keep_snapshots = false;
};

/// One row of the solver log. Fields that do not apply are NaN.
struct TrajectoryRecord {
  Index t = 0;
  double objective = 0;             // b.lambda or k.mu after the update
  double residual = 0;              // ||a - b||_inf or |k - a1|, before the update
  double dual_norm = 0;             // ||lambda||_2, or the raw mu
  double smoothed_mu = std::numeric_limits<double>::quiet_NaN();
  double a1 = std::numeric_limits<double>::quiet_NaN();
  double a2 = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0;
};

struct SolveTrajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<VectorXd> snapshots;
  std::vector<std::pair<std::string, std::string>> config;

  /// Header lines `# key=value`, then
  /// `t,objective,constraint_residual_estimate,mu_or_lambda_norm,smoothed_mu,wall_ms`.
  void write_csv(const std::string& path) const;
  /// Snapshots as a row-major little-endian float64 array, one row per iteration.
  void write_snapshots(const std::string& path) const;
};

struct DiagonalSolution {
  VectorXd lambda;       // last iterate
  VectorXd lambda_mean;  // average of the last floor(iters/2) iterates (the last one if iters < 2)
  SolveTrajectory trajectory;
};

struct TraceSolution {
  double mu = 0;           // last raw iterate
  double mu_smoothed = 0;  // windowed average at the last iteration
  std::vector<double> mu_history;
  SolveTrajectory trajectory;
};

/// lambda + (log b - log a) / beta, entrywise.
VectorXd scaling_step(const VectorXd& lambda, const VectorXd& a, const VectorXd& b, double beta);

/// Noncommutative matrix scaling from lambda0 (zero when absent). Each
/// iteration estimates diag X(lambda) (or computes it exactly in Exact
/// mode) and applies scaling_step.
DiagonalSolution solve_diagonal(const DiagonalProblem& problem, const SolveConfig& config,
                                std::optional<VectorXd> lambda0 = std::nullopt);

/// g(lambda) = b.lambda - Tr[exp(-beta (C - diag lambda))] / beta.
double dual_objective_exact(const DiagonalProblem& problem, const VectorXd& lambda, Index cap = kDenseCap);
/// grad g(lambda) = b - diag X(lambda).
VectorXd dual_gradient_exact(const DiagonalProblem& problem, const VectorXd& lambda, Index cap = kDenseCap);
/// g0(lambda) = b.lambda - e^{beta (lambda - lambda0)} . diag X(lambda0) / beta.
double minorizer_exact(const DiagonalProblem& problem, const VectorXd& lambda0, const VectorXd& lambda,
                       Index cap = kDenseCap);

/// mu - (k - a1) / a2, with a2 the (negative) curvature estimate.
double newton_step(double mu, double a1, double a2, double k);

/// Dual value and derivatives of the trace-constrained problem at mu.
struct TraceDerivatives {
  double g = 0;
  double dg = 0;   // k - Tr X(mu)
  double d2g = 0;  // -beta Tr[(I - X) X]
  double trace_X = 0;
};
TraceDerivatives trace_derivatives_exact(const TraceProblem& problem, double mu, Index cap = kDenseCap);

/// Chebyshev expansion used by the trace solver: F_beta^{1/2} on [-R, R]
/// with R the range of the problem interval.
ChebApproxd trace_problem_expansion(const TraceProblem& problem, double tol = kDefaultChebTol);

/// Newton iteration on mu from the interval midpoint (or mu0). Iterates are
/// clamped to the problem interval; Exact mode also keeps a sign bracket.
TraceSolution solve_trace(const TraceProblem& problem, const SolveConfig& config,
                          std::optional<double> mu0 = std::nullopt);

/// Mean of history[t - floor(t/2)], ..., history[t - 1] (1-based t; the
/// whole prefix when t < 2).
double smooth_trajectory(const std::vector<double>& history, Index t);

}  // namespace ersdp

#endif  // ERSDP_DUALSOLVE_HPP_
