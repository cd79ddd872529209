#include "support.hpp"

#include "ersdp/maxcut.hpp"

#include <doctest.h>

using namespace ersdp;
using namespace ersdp::test;

namespace {

GibbsFactorOperatord factor_at(const MaxCutInstance& inst, const VectorXd& lambda, double beta) {
  return GibbsFactorOperatord::half_exponential(DualShiftedOperatord::diagonal(inst.cost, lambda), beta, 1e-10);
}

MaxCutInstance single_edge() {
  return make_maxcut_instance(SparseSymMatrixd::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
}

}  // namespace

TEST_CASE("Erdos-Renyi generator") {
  const auto empty = erdos_renyi(10, 0.0, 1);
  CHECK(empty.adjacency->nnz() == 0);
  CHECK(empty.cost->nnz() == 0);

  const auto tri = erdos_renyi(3, 1.0, 1);
  const MatrixXd C = tri.cost->to_dense();
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(C(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 3));
  CHECK(tri.total_weight() == 3.0);

  double degree = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) degree += 2 * erdos_renyi(1000, 3.0 / 1000, seed).total_weight() / 1000;
  degree /= 20;
  CHECK(degree >= 2.7);
  CHECK(degree <= 3.3);

  const auto a = erdos_renyi(50, 0.1, 4), b = erdos_renyi(50, 0.1, 4);
  CHECK(a.adjacency->to_dense() == b.adjacency->to_dense());
  CHECK(a.adjacency->to_dense() != erdos_renyi(50, 0.1, 5).adjacency->to_dense());
  CHECK(a.adjacency->diagonal().norm() == 0);

  CHECK_THROWS_AS(erdos_renyi(5, 1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(erdos_renyi(5, -0.1, 0), std::invalid_argument);
}

TEST_CASE("cut bookkeeping") {
  const auto inst = single_edge();
  CHECK(inst.cost->coeff(0, 1) == 0.5);
  // x = (1, -1) cuts the edge: value -1, cut 1
  CHECK(inst.cut_from_objective(-1.0) == 1.0);
  CHECK(inst.cut_from_objective(1.0) == 0.0);
}

TEST_CASE("lower bound examples") {
  const auto zero = make_maxcut_instance(SparseSymMatrixd(4));
  const auto lz = lower_bound(zero, VectorXd::Zero(4));
  CHECK(lz.mu == 0.0);
  CHECK(lz.lower == 0.0);

  const auto lb = lower_bound(single_edge(), VectorXd::Zero(2));
  CHECK(lb.mu == doctest::Approx(-0.5));
  CHECK(lb.lower == doctest::Approx(-1.0));
  CHECK(brute_force_min(*single_edge().cost) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(lower_bound(zero, VectorXd::Constant(4, std::nan("")), 1e-8), std::invalid_argument);
}

TEST_CASE("rounding examples") {
  const auto zero = make_maxcut_instance(SparseSymMatrixd(5));
  const auto Y = factor_at(zero, VectorXd::Zero(5), 1.0);
  CHECK(gw_round(Y, *zero.cost, 1, 0).value == 0.0);
  const auto ub0 = expected_upper_bound(Y, *zero.cost, 10, 1);
  CHECK(ub0.mean == 0.0);
  CHECK(ub0.best == 0.0);

  const auto edge = single_edge();
  const auto Ye = factor_at(edge, VectorXd::Zero(2), 3.0);
  for (std::uint64_t it = 0; it < 20; ++it) {
    const auto r = gw_round(Ye, *edge.cost, 2, it);
    CHECK((r.value == 1.0 || r.value == -1.0));
    CHECK((r.x.array().abs() == 1).all());
  }
  const auto one = expected_upper_bound(Ye, *edge.cost, 1, 3);
  CHECK(one.mean == one.best);
  // sample s of expected_upper_bound is gw_round with iteration s
  CHECK(one.mean == gw_round(Ye, *edge.cost, 3, 0).value);
  CHECK_THROWS_AS(expected_upper_bound(Ye, *edge.cost, 0, 3), std::invalid_argument);
}

TEST_CASE("brute force oracle") {
  // 4-cycle: maximum cut 4, x^T A x = -8, C = A / 4
  std::vector<SparseSymMatrixd::Triplet> t;
  for (int i = 0; i < 4; ++i) {
    t.emplace_back(i, (i + 1) % 4, 1.0);
    t.emplace_back((i + 1) % 4, i, 1.0);
  }
  const auto cyc = make_maxcut_instance(SparseSymMatrixd::from_triplets(4, t));
  CHECK(brute_force_min(*cyc.cost) == doctest::Approx(-2.0));
  CHECK(cyc.cut_from_objective(-2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(brute_force_min(SparseSymMatrixd(25)), std::invalid_argument);
}

TEST_CASE("certificates bracket the exhaustive optimum for any lambda") {
  std::mt19937_64 eng(1);
  std::normal_distribution<double> normal;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 6 + Index(seed % 7);
    const auto inst = erdos_renyi(n, 0.4, seed);
    const double opt = brute_force_min(*inst.cost);
    VectorXd lambda(n);
    for (Index i = 0; i < n; ++i) lambda(i) = 0.3 * normal(eng);
    const auto lb = lower_bound(inst, lambda, 1e-10, 2000, seed);
    CHECK(lb.lower <= opt + 1e-9);
    const auto ub = expected_upper_bound(factor_at(inst, lambda, 5.0), *inst.cost, 50, seed);
    CHECK(ub.best >= opt - 1e-12);
    CHECK(ub.mean >= ub.best);
  }
}

TEST_CASE("converged exact solve on a small instance") {
  const auto inst = erdos_renyi(12, 0.4, 3);
  MaxCutConfig cfg;
  cfg.beta = 100;
  cfg.solve.mode = SolveMode::Exact;
  cfg.solve.iters = 300;
  cfg.samples = 1000;
  const auto run = run_maxcut(inst, cfg);
  const double opt = brute_force_min(*inst.cost);
  CHECK(run.bounds.lower <= opt + 1e-9);
  CHECK(run.bounds.upper_best >= opt - 1e-12);
  CHECK(run.bounds.lower <= run.bounds.upper_best);
  CHECK(run.bounds.upper_best <= run.bounds.upper_expected);

  // the shifted dual point is feasible
  const VectorXd shifted = run.solution.lambda_mean + run.bounds.shift_mu * VectorXd::Ones(12);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(inst.cost->to_dense() - MatrixXd(shifted.asDiagonal()));
  CHECK(es.eigenvalues()(0) >= -1e-8);
}

TEST_CASE("pipeline smoke run and determinism") {
  MaxCutConfig cfg;
  cfg.n = 256;
  cfg.beta = 10;
  cfg.samples = 200;
  cfg.seed = 3;
  const auto a = run_maxcut_experiment(cfg);
  CHECK(a.bounds.ratio > 0);
  CHECK(a.bounds.ratio <= 1);
  CHECK(a.bounds.lower <= a.bounds.upper_best);
  CHECK(a.bounds.upper_best <= a.bounds.upper_expected);
  CHECK(a.bounds.samples == 200);
  CHECK(a.solution.trajectory.records.size() == 400);

  const auto b = run_maxcut_experiment(cfg);
  CHECK(a.bounds.lower == b.bounds.lower);
  CHECK(a.bounds.upper_expected == b.bounds.upper_expected);
  CHECK(a.bounds.ratio == b.bounds.ratio);
  CHECK(a.solution.lambda == b.solution.lambda);
}

TEST_CASE("seed derivation") {
  const auto s = MaxCutSeeds::derive(7);
  const auto t = MaxCutSeeds::derive(7);
  CHECK(s.graph == t.graph);
  CHECK(s.solver != s.graph);
  CHECK(s.rounding != s.eig);
  CHECK(MaxCutSeeds::derive(8).graph != s.graph);
}
