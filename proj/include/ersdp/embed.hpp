#ifndef ERSDP_EMBED_HPP_
#define ERSDP_EMBED_HPP_

#include "ersdp/dualsolve.hpp"

#include <cstdint>
#include <optional>

namespace ersdp {

/// n / m fully connected blocks of m consecutive vertices, plus each
/// inter-block pair independently with probability inter_p (1/n if negative).
struct ClusteredGraphConfig {
  Index n = 100;
  Index m = 10;
  double inter_p = -1;
  std::uint64_t seed = 0;

  Index clusters() const { return m > 0 ? n / m : 0; }
};

SparseSymMatrixd clustered_graph(const ClusteredGraphConfig& config);

/// L = I - D^{-1/2} A D^{-1/2}, D = diag(A 1). Throws on isolated vertices.
SparseSymMatrixd normalized_laplacian(const SparseSymMatrixd& adjacency);

/// Psi = Y Z / sqrt(k_tilde): row i embeds vertex i.
struct EmbeddingResult {
  MatrixXd psi;
  Index k_tilde = 0;
  double mu_star = 0;
  std::uint64_t seed = 0;
};

/// Y = F_beta^{1/2}(C - mu I) applied to a k_tilde-column Gaussian probe
/// block keyed by `seed`.
EmbeddingResult recover_embedding(const GibbsFactorOperatord& Y, double mu_star, Index k_tilde,
                                  std::uint64_t seed);
EmbeddingResult recover_embedding(const TraceProblem& problem, double mu_star, Index k_tilde, std::uint64_t seed,
                                  double cheb_tol = kDefaultChebTol);

struct GramValidation {
  double max_scaled_deviation = 0;  // max |G_ij - X_ij| / sqrt(X_ii X_jj)
  double max_deviation = 0;         // max |G_ij - X_ij|
  double relative_frobenius = 0;    // ||G - X||_F / ||X||_F
};

GramValidation gram_validation(const EmbeddingResult& result, const MatrixXd& dense_X, Index cap = kDenseCap);

/// |t1 - k| / k with t1 the Hutchinson estimate of Tr X from `probes` vectors.
double verify_trace_constraint(const GibbsFactorOperatord& Y, double k, Index probes, std::uint64_t seed);

/// ceil(2 k ln n)
Index default_k_tilde(Index n, double k);

struct EmbedConfig {
  ClusteredGraphConfig graph;
  double beta = 5;
  SolveConfig solve{8, 2000};
  Index k_tilde = 0;  // 0: default_k_tilde
  Index verify_probes = 1000;
  /// Interval for the Laplacian spectrum; R = 2 gives the [-2, 2] expansion.
  SpectralInterval<double> interval{0, 2};
};

struct EmbedRun {
  SparseSymMatrixd adjacency;
  TraceProblem problem;
  TraceSolution solution;
  EmbeddingResult embedding;
  double trace_relative_error = 0;
  std::optional<GramValidation> gram;  // when n <= dense cap
};

struct EmbedSeeds {
  std::uint64_t graph, solver, embedding, verify;
  static EmbedSeeds derive(std::uint64_t master);
};

/// Build the clustered graph from `master_seed`, then run_embed.
EmbedRun run_embed_experiment(const EmbedConfig& config, std::uint64_t master_seed);
/// Solve, recover and verify on a given adjacency matrix.
EmbedRun run_embed(SparseSymMatrixd adjacency, double k, const EmbedConfig& config, std::uint64_t master_seed);

}  // namespace ersdp

#endif  // ERSDP_EMBED_HPP_
