#ifndef ERSDP_TOOLS_CLI_HPP_
#define ERSDP_TOOLS_CLI_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ersdp::cli {

/// Bad or missing parameters. `usage` holds the help text to show.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string usage, int exit_code = 2)
      : std::runtime_error(what), usage_(std::move(usage)), exit_code_(exit_code) {}
  const std::string& usage() const { return usage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string usage_;
  int exit_code_;
};

struct ExperimentConfig {
  std::string command;  // maxcut | embed | solve-diagonal | solve-trace | estimator-bench

  long long n = 256;
  double p = -1;        // edge probability, negative: 3 / n
  long long m = 10;     // cluster size
  double inter_p = -1;  // inter-cluster probability, negative: 1 / n
  double beta = 10;
  long long batch = 8;
  long long iters = 400;
  double k = 0;         // trace target; 0: n / m
  long long k_tilde = 0;
  long long samples = 1000;
  long long verify_probes = 1000;
  double b = 1;         // diagonal target for solve-diagonal
  double expmv_tol = 1e-8;
  double cheb_tol = 1e-5;
  double eig_tol = 1e-8;
  long long eig_max_iter = 2000;
  double interval_lower = 0;
  double interval_upper = 0;  // upper <= lower: Gershgorin
  std::uint64_t seed = 0;
  std::string mode = "stochastic";
  std::string probes = "gaussian";
  std::string graph;
  std::string out;
  bool laplacian = false;
  bool force = false;
  bool save_lambda = false;
  bool binary_embedding = false;
  std::vector<long long> bench_batches{1, 2, 4, 8, 16, 32, 64};
  long long trials = 50;
  std::string instance = "maxcut";  // estimator-bench cost matrix
  int threads = 0;

  /// Everything that was set, as key/value text, for headers and manifests.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses `command [--flag value]...`. `--config <file>` supplies flat
/// `key=value` lines using the long flag names; explicit flags win.
ExperimentConfig parse_config(const std::vector<std::string>& args);
ExperimentConfig parse_config(int argc, const char* const* argv);

/// Runs the configured pipeline and writes its outputs. Returns the exit status.
int run(const ExperimentConfig& config);

}  // namespace ersdp::cli

#endif  // ERSDP_TOOLS_CLI_HPP_
