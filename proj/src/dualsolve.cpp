#include "ersdp/dualsolve.hpp"

#include "ersdp/io.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ersdp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string mode_name(SolveMode m) { return m == SolveMode::Exact ? "exact" : "stochastic"; }

void echo_config(SolveTrajectory& traj, const SolveConfig& c) {
  traj.config.emplace_back("batch", std::to_string(c.batch));
  traj.config.emplace_back("iters", std::to_string(c.iters));
  traj.config.emplace_back("seed", std::to_string(c.seed));
  traj.config.emplace_back("mode", mode_name(c.mode));
  traj.config.emplace_back("probes", c.distribution == ProbeDistribution::Gaussian ? "gaussian" : "rademacher");
  traj.config.emplace_back("expmv_tol", format_double(c.expmv_tol));
  traj.config.emplace_back("cheb_tol", format_double(c.cheb_tol));
}

void check_config(const SolveConfig& c) {
  if (c.iters < 1) throw std::invalid_argument("solver: iters must be >= 1");
  if (c.batch < 1) throw std::invalid_argument("solver: batch must be >= 1");
}

}  // namespace

void DiagonalProblem::validate() const {
  if (!C) throw std::invalid_argument("DiagonalProblem: missing cost matrix");
  check_dims(C->n(), b.size(), "DiagonalProblem");
  if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("DiagonalProblem: beta must be > 0");
  if (!(b.array() > 0).all()) throw std::invalid_argument("DiagonalProblem: b must be positive");
}

void TraceProblem::validate() const {
  if (!C) throw std::invalid_argument("TraceProblem: missing cost matrix");
  if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("TraceProblem: beta must be > 0");
  if (!(k > 0) || !(k < double(C->n()))) throw std::invalid_argument("TraceProblem: need 0 < k < n");
  if (!(interval.upper > interval.lower)) throw std::invalid_argument("TraceProblem: empty spectral interval");
}

void SolveTrajectory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& [k, v] : config) out << "# " << k << '=' << v << '\n';
  out << "t,objective,constraint_residual_estimate,mu_or_lambda_norm,smoothed_mu,wall_ms\n";
  for (const auto& r : records) {
    out << r.t << ',' << format_double(r.objective) << ',' << format_double(r.residual) << ','
        << format_double(r.dual_norm) << ',' << format_double(r.smoothed_mu) << ',' << format_double(r.wall_ms)
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void SolveTrajectory::write_snapshots(const std::string& path) const {
  std::vector<double> flat;
  for (const auto& s : snapshots) flat.insert(flat.end(), s.data(), s.data() + s.size());
  write_f64_le(path, flat);
}

VectorXd scaling_step(const VectorXd& lambda, const VectorXd& a, const VectorXd& b, double beta) {
  check_dims(lambda.size(), a.size(), "scaling_step");
  check_dims(lambda.size(), b.size(), "scaling_step");
  if (!(beta > 0)) throw std::invalid_argument("scaling_step: beta must be > 0");
  if (!(a.array() > 0).all()) throw std::domain_error("scaling_step: diagonal estimate must be positive");
  if (!(b.array() > 0).all()) throw std::domain_error("scaling_step: b must be positive");
  return lambda + (b.array().log() - a.array().log()).matrix() / beta;
}

DiagonalSolution solve_diagonal(const DiagonalProblem& problem, const SolveConfig& config,
                                std::optional<VectorXd> lambda0) {
  problem.validate();
  check_config(config);
  const Index n = problem.C->n();
  if (config.mode == SolveMode::Exact && n > config.dense_cap)
    throw std::invalid_argument("solve_diagonal: exact mode needs n <= " + std::to_string(config.dense_cap));

  DiagonalSolution sol;
  sol.lambda = lambda0 ? *lambda0 : VectorXd::Zero(n);
  check_dims(n, sol.lambda.size(), "solve_diagonal");
  auto& traj = sol.trajectory;
  traj.config.emplace_back("solver", "diagonal");
  traj.config.emplace_back("n", std::to_string(n));
  traj.config.emplace_back("beta", format_double(problem.beta));
  echo_config(traj, config);

  const Index window = config.iters < 2 ? 1 : config.iters / 2;
  sol.lambda_mean = VectorXd::Zero(n);
  const auto start = Clock::now();
  for (Index t = 1; t <= config.iters; ++t) {
    const auto op = DualShiftedOperatord::diagonal(problem.C, sol.lambda);
    VectorXd a;
    if (config.mode == SolveMode::Exact) {
      a = dense_reference(op, problem.beta, GibbsKind::HalfExponential, config.dense_cap).X.diagonal();
    } else {
      const auto Y = GibbsFactorOperatord::half_exponential(op, problem.beta, config.expmv_tol);
      const auto probes = draw_probes<double>(n, config.batch, config.seed, std::uint64_t(t), config.distribution);
      a = diag_estimate(Y, probes).a;
    }
    TrajectoryRecord rec;
    rec.t = t;
    rec.residual = (a - problem.b).cwiseAbs().maxCoeff();
    sol.lambda = scaling_step(sol.lambda, a, problem.b, problem.beta);
    if (!sol.lambda.allFinite())
      throw NumericalError("solve_diagonal: non-finite lambda at iteration " + std::to_string(t));
    rec.objective = problem.b.dot(sol.lambda);
    rec.dual_norm = sol.lambda.norm();
    rec.wall_ms = elapsed_ms(start);
    traj.records.push_back(rec);
    if (config.keep_snapshots) traj.snapshots.push_back(sol.lambda);
    if (t > config.iters - window) sol.lambda_mean += sol.lambda;
  }
  sol.lambda_mean /= double(window);
  return sol;
}

double dual_objective_exact(const DiagonalProblem& problem, const VectorXd& lambda, Index cap) {
  problem.validate();
  const auto op = DualShiftedOperatord::diagonal(problem.C, lambda);
  const auto ref = dense_reference(op, problem.beta, GibbsKind::HalfExponential, cap);
  return problem.b.dot(lambda) - ref.trace_exp / problem.beta;
}

VectorXd dual_gradient_exact(const DiagonalProblem& problem, const VectorXd& lambda, Index cap) {
  problem.validate();
  const auto op = DualShiftedOperatord::diagonal(problem.C, lambda);
  return problem.b - dense_reference(op, problem.beta, GibbsKind::HalfExponential, cap).X.diagonal();
}

double minorizer_exact(const DiagonalProblem& problem, const VectorXd& lambda0, const VectorXd& lambda, Index cap) {
  problem.validate();
  check_dims(lambda0.size(), lambda.size(), "minorizer_exact");
  const auto op = DualShiftedOperatord::diagonal(problem.C, lambda0);
  const VectorXd x0 = dense_reference(op, problem.beta, GibbsKind::HalfExponential, cap).X.diagonal();
  const VectorXd growth = (problem.beta * (lambda - lambda0)).array().exp();
  return problem.b.dot(lambda) - growth.dot(x0) / problem.beta;
}

double newton_step(double mu, double a1, double a2, double k) {
  if (!(a2 < 0)) throw std::domain_error("newton_step: curvature estimate must be negative");
  return mu - (k - a1) / a2;
}

TraceDerivatives trace_derivatives_exact(const TraceProblem& problem, double mu, Index cap) {
  problem.validate();
  const auto op = DualShiftedOperatord::scalar(problem.C, mu);
  const auto ref = dense_reference(op, problem.beta, GibbsKind::SqrtFermiDirac, cap);
  TraceDerivatives d;
  d.trace_X = ref.trace_X;
  d.g = problem.k * mu - ref.trace_log1p_exp / problem.beta;
  d.dg = problem.k - ref.trace_X;
  d.d2g = -problem.beta * (ref.trace_X - ref.trace_X2);
  return d;
}

ChebApproxd trace_problem_expansion(const TraceProblem& problem, double tol) {
  const double R = problem.interval.range();
  return GibbsFactorOperatord::fit_sqrt_fermi_dirac(problem.beta, {-R, R}, tol);
}

TraceSolution solve_trace(const TraceProblem& problem, const SolveConfig& config, std::optional<double> mu0) {
  problem.validate();
  check_config(config);
  const Index n = problem.C->n();
  if (config.mode == SolveMode::Exact && n > config.dense_cap)
    throw std::invalid_argument("solve_trace: exact mode needs n <= " + std::to_string(config.dense_cap));

  const double lo_clamp = problem.interval.lower;
  const double hi_clamp = problem.interval.upper;
  std::shared_ptr<const ChebApproxd> cheb;
  if (config.mode == SolveMode::Stochastic)
    cheb = std::make_shared<const ChebApproxd>(trace_problem_expansion(problem, config.cheb_tol));

  TraceSolution sol;
  double mu = mu0 ? *mu0 : problem.interval.center();
  auto& traj = sol.trajectory;
  traj.config.emplace_back("solver", "trace");
  traj.config.emplace_back("n", std::to_string(n));
  traj.config.emplace_back("k", format_double(problem.k));
  traj.config.emplace_back("beta", format_double(problem.beta));
  traj.config.emplace_back("interval_lower", format_double(problem.interval.lower));
  traj.config.emplace_back("interval_upper", format_double(problem.interval.upper));
  if (cheb) traj.config.emplace_back("cheb_degree", std::to_string(cheb->degree()));
  echo_config(traj, config);

  // sign bracket for Exact mode: k - Tr X(mu) is decreasing in mu
  double bracket_lo = lo_clamp, bracket_hi = hi_clamp;
  const auto start = Clock::now();
  for (Index t = 1; t <= config.iters; ++t) {
    double a1 = 0, a2 = 0;
    if (config.mode == SolveMode::Exact) {
      const auto d = trace_derivatives_exact(problem, mu, config.dense_cap);
      a1 = d.trace_X;
      a2 = d.d2g;
    } else {
      const auto op = DualShiftedOperatord::scalar(problem.C, mu);
      const auto Y = GibbsFactorOperatord::sqrt_fermi_dirac(op, problem.beta, cheb);
      const auto probes = draw_probes<double>(n, config.batch, config.seed, std::uint64_t(t), config.distribution);
      const auto s = trace_pair_estimate(Y, probes);
      a1 = s.t1;
      a2 = -problem.beta * (s.t1 - s.t2);
    }

    TrajectoryRecord rec;
    rec.t = t;
    rec.a1 = a1;
    rec.a2 = a2;
    rec.residual = std::abs(problem.k - a1);

    double next;
    if (config.mode == SolveMode::Exact) {
      if (problem.k - a1 > 0)
        bracket_lo = std::max(bracket_lo, mu);
      else
        bracket_hi = std::min(bracket_hi, mu);
      next = a2 < 0 ? newton_step(mu, a1, a2, problem.k) : std::numeric_limits<double>::quiet_NaN();
      if (!(next > bracket_lo && next < bracket_hi)) next = (bracket_lo + bracket_hi) / 2;
      if (a1 == problem.k) next = mu;
    } else {
      next = std::clamp(newton_step(mu, a1, a2, problem.k), lo_clamp, hi_clamp);
    }
    if (!std::isfinite(next))
      throw NumericalError("solve_trace: non-finite mu at iteration " + std::to_string(t));
    mu = next;
    sol.mu_history.push_back(mu);

    rec.objective = problem.k * mu;
    rec.dual_norm = mu;
    rec.smoothed_mu = smooth_trajectory(sol.mu_history, t);
    rec.wall_ms = elapsed_ms(start);
    traj.records.push_back(rec);
  }
  sol.mu = mu;
  sol.mu_smoothed = traj.records.back().smoothed_mu;
  return sol;
}

double smooth_trajectory(const std::vector<double>& history, Index t) {
  if (t < 1 || t > Index(history.size())) throw std::out_of_range("smooth_trajectory: t out of range");
  const Index window = t < 2 ? t : t / 2;
  double s = 0;
  for (Index i = t - window; i < t; ++i) s += history[std::size_t(i)];
  return s / double(window);
}

}  // namespace ersdp
