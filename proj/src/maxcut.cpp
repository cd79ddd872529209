#include "ersdp/maxcut.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ersdp {

double MaxCutInstance::total_weight() const {
  const auto& m = adjacency->storage();
  double w = 0;
  for (Index i = 0; i < m.outerSize(); ++i)
    for (SparseSymMatrixd::Storage::InnerIterator it(m, i); it; ++it)
      if (it.col() > i) w += it.value();
  return w;
}

double MaxCutInstance::cut_from_objective(double value) const {
  // x^T A x = 2 (W - 2 cut) and C = A / n
  return (total_weight() - double(n) * value / 2) / 2;
}

MaxCutInstance make_maxcut_instance(SparseSymMatrixd adjacency) {
  MaxCutInstance inst;
  inst.n = adjacency.n();
  if (inst.n < 1) throw std::invalid_argument("maxcut: empty graph");
  auto A = std::make_shared<const SparseSymMatrixd>(std::move(adjacency));
  inst.cost = std::make_shared<const SparseSymMatrixd>(A->scaled(1.0 / double(inst.n)));
  inst.adjacency = std::move(A);
  return inst;
}

MaxCutInstance erdos_renyi(Index n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("erdos_renyi: n must be >= 1");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("erdos_renyi: p must lie in [0, 1]");
  auto eng = keyed_engine(seed, 0, 0, /*stream=*/0x45520000);
  std::uniform_real_distribution<double> unif(0, 1);
  std::vector<SparseSymMatrixd::Triplet> t;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (unif(eng) < p) {
        t.emplace_back(int(i), int(j), 1.0);
        t.emplace_back(int(j), int(i), 1.0);
      }
    }
  }
  return make_maxcut_instance(SparseSymMatrixd::from_triplets(n, t));
}

LowerBound lower_bound(const MaxCutInstance& instance, const VectorXd& lambda, double eig_tol, Index eig_max_iter,
                       std::uint64_t seed) {
  check_dims(instance.n, lambda.size(), "lower_bound");
  if (!lambda.allFinite()) throw std::invalid_argument("lower_bound: lambda must be finite");
  const auto op = DualShiftedOperatord::diagonal(instance.cost, lambda);
  LowerBound lb;
  lb.eig = min_eigenpair(op, eig_tol, eig_max_iter, seed);
  lb.mu = lb.eig.eigenvalue;
  lb.lower = lambda.sum() + double(instance.n) * lb.mu;
  return lb;
}

namespace {

Rounding round_column(const VectorXd& y, const SparseSymMatrixd& C) {
  Rounding r;
  r.x.resize(y.size());
  VectorXd xd(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    r.x(i) = y(i) < 0 ? -1 : 1;
    xd(i) = r.x(i);
  }
  r.value = xd.dot(C.matvec(xd));
  return r;
}

}  // namespace

Rounding gw_round(const GibbsFactorOperatord& Y, const SparseSymMatrixd& C, std::uint64_t seed,
                  std::uint64_t iteration) {
  check_dims(Y.n(), C.n(), "gw_round");
  const MatrixXd z = probe_column<double>(Y.n(), seed, iteration, 0);
  return round_column(Y.apply(z).col(0), C);
}

UpperBound expected_upper_bound(const GibbsFactorOperatord& Y, const SparseSymMatrixd& C, Index samples,
                                std::uint64_t seed) {
  check_dims(Y.n(), C.n(), "expected_upper_bound");
  if (samples < 1) throw std::invalid_argument("expected_upper_bound: samples must be >= 1");
  constexpr Index kBlock = 64;
  const Index n = Y.n();
  UpperBound ub;
  ub.samples = samples;
  ub.best = std::numeric_limits<double>::infinity();
  double sum = 0;
  for (Index first = 0; first < samples; first += kBlock) {
    const Index cols = std::min(kBlock, samples - first);
    MatrixXd Z(n, cols);
    for (Index c = 0; c < cols; ++c) Z.col(c) = probe_column<double>(n, seed, std::uint64_t(first + c), 0);
    const MatrixXd V = Y.apply(Z);
    for (Index c = 0; c < cols; ++c) {
      const double v = round_column(V.col(c), C).value;
      sum += v;
      ub.best = std::min(ub.best, v);
    }
  }
  ub.mean = sum / double(samples);
  return ub;
}

MaxCutSeeds MaxCutSeeds::derive(std::uint64_t master) {
  auto eng = keyed_engine(master, 0, 0, /*stream=*/0x5345454453);
  MaxCutSeeds s;
  s.graph = eng();
  s.solver = eng();
  s.eig = eng();
  s.rounding = eng();
  return s;
}

MaxCutRun run_maxcut(MaxCutInstance instance, const MaxCutConfig& config) {
  const auto seeds = MaxCutSeeds::derive(config.seed);
  MaxCutRun run;
  run.instance = std::move(instance);
  const auto& inst = run.instance;

  DiagonalProblem problem{inst.cost, VectorXd::Ones(inst.n), config.beta};
  SolveConfig solve = config.solve;
  solve.seed = seeds.solver;
  run.solution = solve_diagonal(problem, solve);
  run.solution.trajectory.config.emplace_back("master_seed", std::to_string(config.seed));

  // single iterates carry O(1/(beta sqrt N)) noise per entry, which costs n times that in the bound
  const VectorXd& lambda = config.average_lambda ? run.solution.lambda_mean : run.solution.lambda;
  const LowerBound lb = lower_bound(inst, lambda, config.eig_tol, config.eig_max_iter, seeds.eig);
  const auto Y = GibbsFactorOperatord::half_exponential(DualShiftedOperatord::diagonal(inst.cost, lambda),
                                                        config.beta, solve.expmv_tol);
  const UpperBound ub = expected_upper_bound(Y, *inst.cost, config.samples, seeds.rounding);

  auto& b = run.bounds;
  b.lower = lb.lower;
  b.shift_mu = lb.mu;
  b.lower_last_iterate =
      config.average_lambda ? lower_bound(inst, run.solution.lambda, config.eig_tol, config.eig_max_iter, seeds.eig).lower
                            : lb.lower;
  b.eig_residual = lb.eig.residual_norm;
  b.upper_expected = ub.mean;
  b.upper_best = ub.best;
  b.samples = ub.samples;
  const double cut_bound = inst.cut_from_objective(b.lower);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  b.ratio = cut_bound > 0 ? inst.cut_from_objective(b.upper_expected) / cut_bound : nan;
  b.objective_ratio = b.lower != 0 ? b.upper_expected / b.lower : nan;
  return run;
}

MaxCutRun run_maxcut_experiment(const MaxCutConfig& config) {
  const auto seeds = MaxCutSeeds::derive(config.seed);
  const double p = config.p < 0 ? 3.0 / double(config.n) : config.p;
  return run_maxcut(erdos_renyi(config.n, p, seeds.graph), config);
}

double brute_force_min(const SparseSymMatrixd& C) {
  const Index n = C.n();
  if (n > 24) throw std::invalid_argument("brute_force_min: n too large");
  const MatrixXd D = C.to_dense();
  double best = std::numeric_limits<double>::infinity();
  VectorXd x(n);
  // x_0 fixed to +1: the objective is invariant under x -> -x
  const std::uint64_t count = n > 0 ? (std::uint64_t(1) << (n - 1)) : 1;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (Index i = 0; i < n; ++i) x(i) = (i > 0 && ((mask >> (i - 1)) & 1)) ? -1.0 : 1.0;
    best = std::min(best, x.dot(D * x));
  }
  return best;
}

}  // namespace ersdp
