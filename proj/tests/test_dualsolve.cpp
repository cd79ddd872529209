#include "support.hpp"

#include "ersdp/dualsolve.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace ersdp;
using namespace ersdp::test;

namespace {

SolveConfig exact_config(Index iters) {
  SolveConfig c;
  c.mode = SolveMode::Exact;
  c.iters = iters;
  return c;
}

}  // namespace

TEST_CASE("scaling step") {
  const VectorXd lambda = VectorXd::Zero(3);
  const VectorXd a = (VectorXd(3) << 1, std::exp(-2.0), 4).finished();
  const VectorXd b = VectorXd::Ones(3);
  const VectorXd next = scaling_step(lambda, a, b, 2.0);
  CHECK(next(0) == 0.0);
  CHECK(next(1) == doctest::Approx(1.0));
  CHECK(next(2) == doctest::Approx(-std::log(4.0) / 2));
  CHECK_THROWS_AS(scaling_step(lambda, VectorXd::Zero(3), b, 1.0), std::domain_error);
  CHECK_THROWS_AS(scaling_step(lambda, a, b, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(scaling_step(lambda, a.head(2), b, 1.0), std::invalid_argument);
}

TEST_CASE("problem validation") {
  const auto C = share(SparseSymMatrixd::identity(3));
  CHECK_THROWS_AS(DiagonalProblem({C, VectorXd::Ones(3), 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalProblem({C, VectorXd::Zero(3), 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalProblem({C, VectorXd::Ones(2), 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalProblem({nullptr, VectorXd::Ones(3), 1.0}).validate(), std::invalid_argument);
  CHECK_NOTHROW(DiagonalProblem({C, VectorXd::Ones(3), 1.0}).validate());
  CHECK_THROWS_AS(TraceProblem({C, 0.0, 1.0, {0, 2}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TraceProblem({C, 3.0, 1.0, {0, 2}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TraceProblem({C, 1.0, 1.0, {2, 0}}).validate(), std::invalid_argument);
  CHECK_NOTHROW(TraceProblem({C, 1.0, 1.0, {0, 2}}).validate());
}

TEST_CASE("diagonal C converges in one exact iteration") {
  const VectorXd d = (VectorXd(4) << 0.5, -1, 2, 0).finished();
  const VectorXd b = (VectorXd(4) << 1, 2, 0.5, 3).finished();
  const double beta = 3;
  DiagonalProblem p{share(SparseSymMatrixd::diagonal(d)), b, beta};
  const auto sol = solve_diagonal(p, exact_config(1));
  const VectorXd expected = d + b.array().log().matrix() / beta;
  CHECK((sol.lambda - expected).norm() <= 1e-12);
  CHECK(dual_gradient_exact(p, sol.lambda).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("exact matrix scaling converges on a random sparse instance") {
  // entries in [-0.3, 0.3]: beta C of order one
  DiagonalProblem p{share(random_sparse(64, 4, 3, 0.3)), VectorXd::Ones(64), 10.0};
  const auto sol = solve_diagonal(p, exact_config(200));
  CHECK(dual_gradient_exact(p, sol.lambda).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(sol.trajectory.records.size() == 200);
  CHECK(sol.trajectory.records.back().objective == doctest::Approx(sol.lambda.sum()));
}

TEST_CASE("dual objective never decreases in exact mode") {
  for (double beta : {1.0, 10.0}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      DiagonalProblem p{share(random_sparse(32, 3, seed)), VectorXd::Ones(32), beta};
      VectorXd lambda = VectorXd::Zero(32);
      double g = dual_objective_exact(p, lambda);
      for (int t = 0; t < 30; ++t) {
        lambda = solve_diagonal(p, exact_config(1), lambda).lambda;
        const double g_next = dual_objective_exact(p, lambda);
        CHECK(g_next >= g - 1e-10);
        g = g_next;
      }
    }
  }
}

TEST_CASE("minorizer lies below the dual objective and touches it at lambda0") {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> normal;
  DiagonalProblem p{share(random_sparse(12, 3, 8)), VectorXd::Constant(12, 0.7), 2.0};
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd l0(12), l(12);
    for (Index i = 0; i < 12; ++i) {
      l0(i) = 0.5 * normal(eng);
      l(i) = 0.5 * normal(eng);
    }
    CHECK(minorizer_exact(p, l0, l) <= dual_objective_exact(p, l) + 1e-12);
    CHECK(minorizer_exact(p, l0, l0) == doctest::Approx(dual_objective_exact(p, l0)).epsilon(1e-12));
  }
}

TEST_CASE("dual gradient matches finite differences") {
  DiagonalProblem p{share(random_sparse(10, 3, 2)), VectorXd::LinSpaced(10, 0.5, 2), 3.0};
  const VectorXd lambda = 0.2 * VectorXd::Random(10);
  const VectorXd grad = dual_gradient_exact(p, lambda);
  const double h = 1e-6;
  for (Index i = 0; i < 10; ++i) {
    VectorXd up = lambda, down = lambda;
    up(i) += h;
    down(i) -= h;
    const double fd = (dual_objective_exact(p, up) - dual_objective_exact(p, down)) / (2 * h);
    CHECK(fd == doctest::Approx(grad(i)).epsilon(1e-6));
  }
}

TEST_CASE("stochastic diagonal solve is reproducible and averages its tail") {
  DiagonalProblem p{share(random_sparse(40, 3, 6, 0.1)), VectorXd::Ones(40), 5.0};
  SolveConfig c;
  c.iters = 30;
  c.seed = 9;
  c.keep_snapshots = true;
  const auto a = solve_diagonal(p, c);
  const auto b = solve_diagonal(p, c);
  CHECK(a.lambda == b.lambda);
  CHECK(a.trajectory.snapshots.size() == 30);
  VectorXd mean = VectorXd::Zero(40);
  for (int t = 15; t < 30; ++t) mean += a.trajectory.snapshots[std::size_t(t)];
  CHECK((a.lambda_mean - mean / 15).norm() <= 1e-12);
  CHECK(a.trajectory.snapshots.back() == a.lambda);
  c.seed = 10;
  CHECK(solve_diagonal(p, c).lambda != a.lambda);
}

TEST_CASE("newton step") {
  CHECK(newton_step(0.5, 3.0, -2.0, 4.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(newton_step(0.5, 3.0, 0.0, 4.0), std::domain_error);
  CHECK_THROWS_AS(newton_step(0.5, 3.0, 1.0, 4.0), std::domain_error);
}

TEST_CASE("trace derivatives match finite differences of the dual") {
  TraceProblem p{share(random_sparse(30, 3, 4, 0.5)), 10.0, 4.0, {}};
  p.interval = gershgorin_interval(*p.C);
  for (double mu : {-0.3, 0.0, 0.4}) {
    const auto d = trace_derivatives_exact(p, mu);
    const double h = 1e-5;
    const auto up = trace_derivatives_exact(p, mu + h), down = trace_derivatives_exact(p, mu - h);
    CHECK((up.g - down.g) / (2 * h) == doctest::Approx(d.dg).epsilon(1e-6));
    CHECK((up.dg - down.dg) / (2 * h) == doctest::Approx(d.d2g).epsilon(1e-6));
    CHECK(d.dg == doctest::Approx(p.k - d.trace_X));
    CHECK(d.d2g < 0);
  }
}

TEST_CASE("exact trace solve matches bisection") {
  SUBCASE("diagonal C") {
    const VectorXd e = VectorXd::LinSpaced(20, 0, 2);
    TraceProblem p{share(SparseSymMatrixd::diagonal(e)), 7.0, 10.0, {0, 2}};
    const double oracle = bisect(
        [&](double mu) {
          double tr = 0;
          for (Index i = 0; i < 20; ++i) tr += fermi_dirac(e(i) - mu, 10.0);
          return 7.0 - tr;
        },
        -2, 4);
    const auto sol = solve_trace(p, exact_config(60));
    CHECK(std::abs(sol.mu - oracle) <= 1e-8);
  }
  SUBCASE("random sparse C") {
    TraceProblem p{share(random_sparse(100, 4, 21)), 30.0, 5.0, {}};
    p.interval = gershgorin_interval(*p.C);
    const double oracle = bisect([&](double mu) { return trace_derivatives_exact(p, mu).dg; }, p.interval.lower,
                                 p.interval.upper);
    const auto sol = solve_trace(p, exact_config(60));
    CHECK(std::abs(sol.mu - oracle) <= 1e-8);
  }
}

TEST_CASE("stochastic trace solve") {
  const VectorXd e = VectorXd::LinSpaced(60, 0, 2);
  TraceProblem p{share(SparseSymMatrixd::diagonal(e)), 20.0, 5.0, {0, 2}};
  SolveConfig c;
  c.iters = 200;
  c.seed = 4;
  const auto sol = solve_trace(p, c);
  CHECK(sol.mu_history.size() == 200);
  for (const auto& r : sol.trajectory.records) {
    CHECK(r.a2 < 0);
    CHECK(p.interval.contains(r.dual_norm));
  }
  CHECK(sol.mu_smoothed == doctest::Approx(smooth_trajectory(sol.mu_history, 200)));
  const double oracle = bisect([&](double mu) { return trace_derivatives_exact(p, mu).dg; }, 0, 2);
  CHECK(std::abs(sol.mu_smoothed - oracle) < 0.05);
  CHECK(solve_trace(p, c).mu_history == sol.mu_history);
}

TEST_CASE("smoothing window") {
  const std::vector<double> h{1, 2, 3, 4, 5, 6};
  CHECK(smooth_trajectory(h, 1) == 1);
  CHECK(smooth_trajectory(h, 2) == 2);    // window 1: history[1]
  CHECK(smooth_trajectory(h, 4) == 3.5);  // history[2..3]
  CHECK(smooth_trajectory(h, 6) == 5);    // history[3..5]
  CHECK(smooth_trajectory(h, 5) == 4.5);  // history[3..4]
  CHECK_THROWS_AS(smooth_trajectory(h, 7), std::out_of_range);
  CHECK_THROWS_AS(smooth_trajectory(h, 0), std::out_of_range);
}

TEST_CASE("trajectory CSV layout") {
  DiagonalProblem p{share(random_sparse(10, 2, 1, 0.1)), VectorXd::Ones(10), 2.0};
  SolveConfig c;
  c.iters = 5;
  c.keep_snapshots = true;
  const auto sol = solve_diagonal(p, c);
  const auto dir = std::filesystem::temp_directory_path() / "ersdp_test_traj";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "t.csv").string();
  sol.trajectory.write_csv(path);
  std::ifstream in(path);
  std::string line;
  int comments = 0, rows = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      ++comments;
      CHECK(line.find('=') != std::string::npos);
    } else if (!saw_header) {
      CHECK(line == "t,objective,constraint_residual_estimate,mu_or_lambda_norm,smoothed_mu,wall_ms");
      saw_header = true;
    } else {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 5);
      CHECK(line.find(",nan,") != std::string::npos);  // no smoothed mu for the diagonal solver
    }
  }
  CHECK(comments > 3);
  CHECK(rows == 5);
  sol.trajectory.write_snapshots((dir / "l.bin").string());
  CHECK(std::filesystem::file_size(dir / "l.bin") == 5 * 10 * sizeof(double));
  std::filesystem::remove_all(dir);
}
