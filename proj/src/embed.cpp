#include "ersdp/embed.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ersdp {

SparseSymMatrixd clustered_graph(const ClusteredGraphConfig& config) {
  const Index n = config.n, m = config.m;
  if (m < 2) throw std::invalid_argument("clustered_graph: block size m must be >= 2");
  if (n < m || n % m != 0) throw std::invalid_argument("clustered_graph: m must divide n");
  const double p = config.inter_p < 0 ? 1.0 / double(n) : config.inter_p;
  if (p > 1) throw std::invalid_argument("clustered_graph: inter-block probability must be <= 1");

  auto eng = keyed_engine(config.seed, 0, 0, /*stream=*/0x434c5553);
  std::uniform_real_distribution<double> unif(0, 1);
  std::vector<SparseSymMatrixd::Triplet> t;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same_block = i / m == j / m;
      // the draw happens for every pair so the stream does not depend on m
      const bool inter = unif(eng) < p;
      if (same_block || inter) {
        t.emplace_back(int(i), int(j), 1.0);
        t.emplace_back(int(j), int(i), 1.0);
      }
    }
  }
  return SparseSymMatrixd::from_triplets(n, t);
}

SparseSymMatrixd normalized_laplacian(const SparseSymMatrixd& adjacency) {
  const Index n = adjacency.n();
  const VectorXd deg = adjacency.matvec(VectorXd::Ones(n));
  for (Index i = 0; i < n; ++i)
    if (!(deg(i) > 0)) throw std::invalid_argument("normalized_laplacian: vertex " + std::to_string(i) + " is isolated");
  const VectorXd inv_sqrt = deg.cwiseSqrt().cwiseInverse();

  std::vector<SparseSymMatrixd::Triplet> t;
  t.reserve(std::size_t(adjacency.nnz() + n));
  for (Index i = 0; i < n; ++i) t.emplace_back(int(i), int(i), 1.0);
  const auto& a = adjacency.storage();
  for (Index i = 0; i < n; ++i)
    for (SparseSymMatrixd::Storage::InnerIterator it(a, i); it; ++it)
      t.emplace_back(int(i), int(it.col()), -it.value() * inv_sqrt(i) * inv_sqrt(it.col()));
  return SparseSymMatrixd::from_triplets(n, t);
}

EmbeddingResult recover_embedding(const GibbsFactorOperatord& Y, double mu_star, Index k_tilde, std::uint64_t seed) {
  if (k_tilde < 1) throw std::invalid_argument("recover_embedding: k_tilde must be >= 1");
  const auto probes = draw_probes<double>(Y.n(), k_tilde, seed, 0);
  EmbeddingResult r;
  r.psi = Y.apply(probes.Z) / std::sqrt(double(k_tilde));
  r.k_tilde = k_tilde;
  r.mu_star = mu_star;
  r.seed = seed;
  return r;
}

EmbeddingResult recover_embedding(const TraceProblem& problem, double mu_star, Index k_tilde, std::uint64_t seed,
                                  double cheb_tol) {
  problem.validate();
  const auto cheb = std::make_shared<const ChebApproxd>(trace_problem_expansion(problem, cheb_tol));
  const auto Y = GibbsFactorOperatord::sqrt_fermi_dirac(DualShiftedOperatord::scalar(problem.C, mu_star),
                                                        problem.beta, cheb);
  return recover_embedding(Y, mu_star, k_tilde, seed);
}

GramValidation gram_validation(const EmbeddingResult& result, const MatrixXd& dense_X, Index cap) {
  const Index n = result.psi.rows();
  if (n > cap) throw std::invalid_argument("gram_validation: n exceeds dense cap");
  check_dims(n, dense_X.rows(), "gram_validation");
  const MatrixXd G = result.psi * result.psi.transpose();
  const MatrixXd diff = G - dense_X;
  GramValidation v;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double d = std::abs(diff(i, j));
      v.max_deviation = std::max(v.max_deviation, d);
      const double s = std::sqrt(dense_X(i, i) * dense_X(j, j));
      if (s > 0) v.max_scaled_deviation = std::max(v.max_scaled_deviation, d / s);
    }
  }
  const double xf = dense_X.norm();
  v.relative_frobenius = xf > 0 ? diff.norm() / xf : diff.norm();
  return v;
}

double verify_trace_constraint(const GibbsFactorOperatord& Y, double k, Index probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("verify_trace_constraint: probes must be >= 1");
  if (!(k > 0)) throw std::invalid_argument("verify_trace_constraint: k must be positive");
  // Tr X = Tr Y^2 only needs V = YZ
  const auto Z = draw_probes<double>(Y.n(), probes, seed, 0);
  const double t1 = diag_estimate(Y, Z).t1;
  return std::abs(t1 - k) / k;
}

Index default_k_tilde(Index n, double k) { return Index(std::ceil(2 * k * std::log(double(n)))); }

EmbedSeeds EmbedSeeds::derive(std::uint64_t master) {
  auto eng = keyed_engine(master, 0, 0, /*stream=*/0x454d424544);
  EmbedSeeds s;
  s.graph = eng();
  s.solver = eng();
  s.embedding = eng();
  s.verify = eng();
  return s;
}

EmbedRun run_embed(SparseSymMatrixd adjacency, double k, const EmbedConfig& config, std::uint64_t master_seed) {
  const auto seeds = EmbedSeeds::derive(master_seed);
  EmbedRun run;
  run.adjacency = std::move(adjacency);
  const Index n = run.adjacency.n();
  auto L = std::make_shared<const SparseSymMatrixd>(normalized_laplacian(run.adjacency));
  run.problem = TraceProblem{L, k, config.beta, config.interval};

  SolveConfig solve = config.solve;
  solve.seed = seeds.solver;
  run.solution = solve_trace(run.problem, solve);
  run.solution.trajectory.config.emplace_back("master_seed", std::to_string(master_seed));

  const double mu_star = run.solution.mu_smoothed;
  const auto cheb = std::make_shared<const ChebApproxd>(trace_problem_expansion(run.problem, solve.cheb_tol));
  const auto Y = GibbsFactorOperatord::sqrt_fermi_dirac(DualShiftedOperatord::scalar(L, mu_star), config.beta, cheb);
  const Index k_tilde = config.k_tilde > 0 ? config.k_tilde : default_k_tilde(n, k);
  run.embedding = recover_embedding(Y, mu_star, k_tilde, seeds.embedding);
  run.trace_relative_error = verify_trace_constraint(Y, k, config.verify_probes, seeds.verify);
  if (n <= solve.dense_cap) {
    const auto ref = dense_reference(DualShiftedOperatord::scalar(L, mu_star), config.beta, GibbsKind::SqrtFermiDirac,
                                     solve.dense_cap);
    run.gram = gram_validation(run.embedding, ref.X, solve.dense_cap);
  }
  return run;
}

EmbedRun run_embed_experiment(const EmbedConfig& config, std::uint64_t master_seed) {
  const auto seeds = EmbedSeeds::derive(master_seed);
  ClusteredGraphConfig g = config.graph;
  g.seed = seeds.graph;
  auto A = clustered_graph(g);
  return run_embed(std::move(A), double(g.clusters()), config, master_seed);
}

}  // namespace ersdp
