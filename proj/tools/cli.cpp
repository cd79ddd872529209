#include "cli.hpp"

#include "ersdp/embed.hpp"
#include "ersdp/io.hpp"
#include "ersdp/maxcut.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ersdp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<std::string> kCommands{"maxcut", "embed", "solve-diagonal", "solve-trace", "estimator-bench"};
const std::set<std::string> kFlagKeys{"force", "laplacian", "save-lambda", "binary-embedding"};

struct Registry {
  CLI::App app{"Entropically regularized SDP solver and experiments", "ersdp"};
  std::map<std::string, CLI::App*> commands;
};

void add_common(CLI::App* sub, ExperimentConfig& c) {
  sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--out", c.out, "output directory (default out/<command>)");
  sub->add_flag("--force", c.force, "overwrite a non-empty output directory");
  sub->add_option("--threads", c.threads, "worker threads (0: runtime default)");
  sub->add_option("--beta", c.beta, "inverse temperature");
  sub->add_option("--probes", c.probes, "probe distribution")->check(CLI::IsMember({"gaussian", "rademacher"}));
}

void add_solver(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--batch", c.batch, "probe batch size N");
  sub->add_option("--iters", c.iters, "solver iterations");
  sub->add_option("--mode", c.mode, "stochastic or exact (dense, n <= 512)")
      ->check(CLI::IsMember({"stochastic", "exact"}));
}

void add_interval(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--interval-lower", c.interval_lower, "lower spectral bound of C");
  sub->add_option("--interval-upper", c.interval_upper, "upper spectral bound of C");
}

void build(Registry& r, ExperimentConfig& c) {
  r.app.require_subcommand(1);
  r.app.set_version_flag("--version", "ersdp 0.1.0");

  auto* mc = r.app.add_subcommand("maxcut", "Goemans-Williamson bounds on a G(n, p) or edge-list graph");
  add_common(mc, c);
  add_solver(mc, c);
  mc->add_option("--n", c.n, "vertices");
  mc->add_option("--p", c.p, "edge probability (default 3/n)");
  mc->add_option("--graph", c.graph, "edge-list file instead of a random graph");
  mc->add_option("--samples", c.samples, "rounding samples");
  mc->add_option("--expmv-tol", c.expmv_tol, "Taylor truncation tolerance");
  mc->add_option("--eig-tol", c.eig_tol, "relative residual for the eigenvalue shift");
  mc->add_option("--eig-max-iter", c.eig_max_iter, "eigensolver iteration cap");
  mc->add_flag("--save-lambda", c.save_lambda, "write lambda after every iteration to lambda.bin");
  r.commands["maxcut"] = mc;

  auto* em = r.app.add_subcommand("embed", "Randomized spectral embedding of a clustered graph");
  add_common(em, c);
  add_solver(em, c);
  add_interval(em, c);
  em->add_option("--n", c.n, "vertices (multiple of m)");
  em->add_option("--m", c.m, "cluster size");
  em->add_option("--inter-p", c.inter_p, "inter-cluster edge probability (default 1/n)");
  em->add_option("--graph", c.graph, "edge-list file instead of a random graph (needs --k)");
  em->add_option("--k", c.k, "trace target (default n/m)");
  em->add_option("--k-tilde", c.k_tilde, "embedding dimension (default ceil(2 k ln n))");
  em->add_option("--verify-probes", c.verify_probes, "probes for the final trace check");
  em->add_option("--cheb-tol", c.cheb_tol, "Chebyshev sup-error tolerance");
  em->add_flag("--binary-embedding", c.binary_embedding, "also write embedding.bin");
  r.commands["embed"] = em;

  auto* sd = r.app.add_subcommand("solve-diagonal", "Noncommutative matrix scaling for diag(X) = b");
  add_common(sd, c);
  add_solver(sd, c);
  sd->add_option("--n", c.n, "vertices of the random cost graph");
  sd->add_option("--p", c.p, "edge probability (default 3/n)");
  sd->add_option("--graph", c.graph, "edge list holding C directly");
  sd->add_option("--b", c.b, "diagonal target (constant)");
  sd->add_option("--expmv-tol", c.expmv_tol, "Taylor truncation tolerance");
  sd->add_flag("--save-lambda", c.save_lambda, "write lambda after every iteration to lambda.bin");
  r.commands["solve-diagonal"] = sd;

  auto* st = r.app.add_subcommand("solve-trace", "Stochastic Newton for Tr X = k with 0 < X < I");
  add_common(st, c);
  add_solver(st, c);
  add_interval(st, c);
  st->add_option("--n", c.n, "vertices of the random clustered graph");
  st->add_option("--m", c.m, "cluster size");
  st->add_option("--inter-p", c.inter_p, "inter-cluster edge probability (default 1/n)");
  st->add_option("--graph", c.graph, "edge list holding C (or its graph with --laplacian)");
  st->add_flag("--laplacian", c.laplacian, "use the normalized Laplacian of --graph");
  st->add_option("--k", c.k, "trace target (default n/m)");
  st->add_option("--cheb-tol", c.cheb_tol, "Chebyshev sup-error tolerance");
  r.commands["solve-trace"] = st;

  auto* eb = r.app.add_subcommand("estimator-bench", "Diagonal estimator error versus batch size");
  add_common(eb, c);
  eb->add_option("--n", c.n, "dimension (<= 512)");
  eb->add_option("--p", c.p, "edge probability for the maxcut instance");
  eb->add_option("--m", c.m, "cluster size for the laplacian instance");
  eb->add_option("--instance", c.instance, "maxcut or laplacian")->check(CLI::IsMember({"maxcut", "laplacian"}));
  eb->add_option("--batches", c.bench_batches, "batch sizes")->delimiter(',');
  eb->add_option("--trials", c.trials, "trials per batch size");
  eb->add_option("--expmv-tol", c.expmv_tol, "Taylor truncation tolerance");
  eb->add_option("--cheb-tol", c.cheb_tol, "Chebyshev sup-error tolerance");
  r.commands["estimator-bench"] = eb;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key=value lines turned into flag tokens.
std::vector<std::string> config_file_tokens(const std::string& path, const std::string& usage) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path, usage);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value", usage);
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key", usage);
    if (kFlagKeys.count(key)) {
      if (value == "true" || value == "1")
        tokens.push_back("--" + key);
      else if (value != "false" && value != "0")
        throw ConfigError(path + ":" + std::to_string(lineno) + ": " + key + " expects true/false", usage);
    } else {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    }
  }
  return tokens;
}

void validate(const ExperimentConfig& c, const std::string& usage) {
  auto fail = [&](const std::string& msg) { throw ConfigError(msg, usage); };
  const bool generated = c.graph.empty();
  if (!(c.beta > 0) || !std::isfinite(c.beta)) fail("--beta must be positive");
  if (c.command != "estimator-bench") {
    if (c.batch < 1) fail("--batch must be >= 1");
    if (c.iters < 1) fail("--iters must be >= 1");
  }
  if (generated && c.n < 1) fail("--n must be >= 1");
  if (c.p > 1) fail("--p must be <= 1");
  if (c.inter_p > 1) fail("--inter-p must be <= 1");
  if (c.expmv_tol <= 0 || c.cheb_tol <= 0 || c.eig_tol <= 0) fail("tolerances must be positive");
  if (c.threads < 0) fail("--threads must be >= 0");
  if (!generated && !fs::exists(c.graph)) fail("graph file not found: " + c.graph);
  if (c.mode == "exact" && generated && c.n > kDenseCap) fail("exact mode needs n <= 512");

  if (c.command == "maxcut") {
    if (c.samples < 1) fail("--samples must be >= 1");
    if (c.eig_max_iter < 1) fail("--eig-max-iter must be >= 1");
  } else if (c.command == "embed" || c.command == "solve-trace") {
    if (generated) {
      if (c.m < 2) fail("--m must be >= 2");
      if (c.n % c.m != 0) fail("--m must divide --n");
    } else if (!(c.k > 0)) {
      fail("--k is required with --graph");
    }
    if (c.k < 0) fail("--k must be positive");
    if (c.k_tilde < 0) fail("--k-tilde must be >= 0");
    if (c.verify_probes < 1) fail("--verify-probes must be >= 1");
  } else if (c.command == "solve-diagonal") {
    if (!(c.b > 0)) fail("--b must be positive");
  } else if (c.command == "estimator-bench") {
    if (c.n > kDenseCap) fail("estimator-bench needs n <= 512");
    if (c.trials < 1) fail("--trials must be >= 1");
    if (c.bench_batches.empty()) fail("--batches must not be empty");
    for (auto b : c.bench_batches)
      if (b < 1) fail("--batches entries must be >= 1");
    if (c.instance == "laplacian" && (c.m < 2 || c.n % c.m != 0)) fail("--m must divide --n");
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> e{{"command", command}};
  auto add = [&](const char* k, const std::string& v) { e.emplace_back(k, v); };
  auto num = [](double v) { return format_double(v); };
  add("seed", std::to_string(seed));
  add("beta", num(beta));
  add("probes", probes);
  if (!graph.empty()) add("graph", graph);
  if (command != "estimator-bench") {
    add("mode", mode);
    add("batch", std::to_string(batch));
    add("iters", std::to_string(iters));
  }
  if (command == "maxcut" || command == "solve-diagonal") {
    add("n", std::to_string(n));
    add("p", num(p < 0 ? 3.0 / double(n) : p));
    add("expmv_tol", num(expmv_tol));
    if (command == "maxcut") {
      add("samples", std::to_string(samples));
      add("eig_tol", num(eig_tol));
      add("eig_max_iter", std::to_string(eig_max_iter));
    } else {
      add("b", num(b));
    }
  } else if (command == "embed" || command == "solve-trace") {
    add("n", std::to_string(n));
    add("m", std::to_string(m));
    add("inter_p", num(inter_p < 0 ? 1.0 / double(n) : inter_p));
    add("k", num(k > 0 ? k : double(n / std::max<long long>(m, 1))));
    add("cheb_tol", num(cheb_tol));
    if (interval_upper > interval_lower) {
      add("interval_lower", num(interval_lower));
      add("interval_upper", num(interval_upper));
    }
    if (command == "embed") {
      add("k_tilde", std::to_string(k_tilde));
      add("verify_probes", std::to_string(verify_probes));
    } else {
      add("laplacian", laplacian ? "true" : "false");
    }
  } else if (command == "estimator-bench") {
    add("n", std::to_string(n));
    add("instance", instance);
    std::string bs;
    for (auto b : bench_batches) bs += (bs.empty() ? "" : ",") + std::to_string(b);
    add("batches", bs);
    add("trials", std::to_string(trials));
  }
  return e;
}

namespace {

// help of the subcommand being parsed, or the top-level help
std::string command_usage(const Registry& r, const std::string& fallback) {
  for (const auto& [name, app] : r.commands)
    if (app->parsed()) return app->help();
  return fallback;
}

}  // namespace

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  ExperimentConfig c;
  Registry r;
  build(r, c);
  const std::string usage = r.app.help();

  // pull out --config so its lines can be placed ahead of the explicit flags
  std::vector<std::string> explicit_args;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file", usage);
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      explicit_args.push_back(args[i]);
    }
  }
  std::vector<std::string> tokens;
  if (!explicit_args.empty() && std::find(kCommands.begin(), kCommands.end(), explicit_args[0]) != kCommands.end()) {
    tokens.push_back(explicit_args[0]);
    if (!config_path.empty()) {
      auto file = config_file_tokens(config_path, usage);
      tokens.insert(tokens.end(), file.begin(), file.end());
    }
    tokens.insert(tokens.end(), explicit_args.begin() + 1, explicit_args.end());
  } else {
    tokens = explicit_args;
  }

  std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  try {
    r.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw ConfigError("help requested", command_usage(r, usage), 0);
  } catch (const CLI::CallForVersion&) {
    throw ConfigError("ersdp 0.1.0", "", 0);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what(), command_usage(r, usage));
  }
  for (const auto& [name, app] : r.commands) {
    if (app->parsed()) {
      c.command = name;
      if (c.out.empty()) c.out = "out/" + name;
      validate(c, app->help());
    }
  }
  return c;
}

ExperimentConfig parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

namespace {

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : c.echo()) j[k] = v;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SolveConfig solve_config(const ExperimentConfig& c) {
  SolveConfig s;
  s.batch = c.batch;
  s.iters = c.iters;
  s.seed = c.seed;
  s.mode = c.mode == "exact" ? SolveMode::Exact : SolveMode::Stochastic;
  s.distribution = c.probes == "rademacher" ? ProbeDistribution::Rademacher : ProbeDistribution::Gaussian;
  s.expmv_tol = c.expmv_tol;
  s.cheb_tol = c.cheb_tol;
  s.keep_snapshots = c.save_lambda;
  return s;
}

void prepend_config(SolveTrajectory& traj, const ExperimentConfig& c) {
  auto echo = c.echo();
  for (auto& kv : traj.config) echo.push_back(std::move(kv));
  traj.config = std::move(echo);
}

std::vector<std::string> run_maxcut_command(const ExperimentConfig& c, const fs::path& dir) {
  MaxCutConfig mc;
  mc.n = c.n;
  mc.p = c.p;
  mc.beta = c.beta;
  mc.solve = solve_config(c);
  mc.samples = c.samples;
  mc.seed = c.seed;
  mc.eig_tol = c.eig_tol;
  mc.eig_max_iter = c.eig_max_iter;
  MaxCutRun run = c.graph.empty() ? run_maxcut_experiment(mc) : run_maxcut(make_maxcut_instance(read_edge_list(c.graph)), mc);

  std::vector<std::string> files{"trajectory.csv", "bounds.json"};
  prepend_config(run.solution.trajectory, c);
  run.solution.trajectory.write_csv((dir / "trajectory.csv").string());
  const auto& b = run.bounds;
  json j{{"config", config_json(c)},
         {"n", run.instance.n},
         {"edges_weight", run.instance.total_weight()},
         {"lower", nullable(b.lower)},
         {"upper_expected", nullable(b.upper_expected)},
         {"upper_best", nullable(b.upper_best)},
         {"ratio", nullable(b.ratio)},
         {"objective_ratio", nullable(b.objective_ratio)},
         {"shift_mu", nullable(b.shift_mu)},
         {"lower_last_iterate", nullable(b.lower_last_iterate)},
         {"eig_residual", nullable(b.eig_residual)},
         {"samples", b.samples},
         {"unregularized_dual_objective", nullable(run.solution.lambda.sum())},
         {"unregularized_dual_objective_averaged", nullable(run.solution.lambda_mean.sum())},
         {"reference_gw_ratio", kGoemansWilliamsonAlpha}};
  write_json(dir / "bounds.json", j);
  if (c.save_lambda) {
    run.solution.trajectory.write_snapshots((dir / "lambda.bin").string());
    files.push_back("lambda.bin");
  }
  return files;
}

std::vector<std::string> run_embed_command(const ExperimentConfig& c, const fs::path& dir) {
  EmbedConfig ec;
  ec.graph = {c.n, c.m, c.inter_p, 0};
  ec.beta = c.beta;
  ec.solve = solve_config(c);
  ec.k_tilde = c.k_tilde;
  ec.verify_probes = c.verify_probes;
  if (c.interval_upper > c.interval_lower) ec.interval = {c.interval_lower, c.interval_upper};

  EmbedRun run;
  if (c.graph.empty()) {
    if (c.k > 0) throw std::invalid_argument("--k is derived from n/m for generated graphs");
    run = run_embed_experiment(ec, c.seed);
  } else {
    run = run_embed(read_edge_list(c.graph), c.k, ec, c.seed);
  }

  std::vector<std::string> files{"trajectory.csv", "embedding.csv", "validation.json"};
  prepend_config(run.solution.trajectory, c);
  run.solution.trajectory.write_csv((dir / "trajectory.csv").string());
  auto header = c.echo();
  header.emplace_back("k_tilde_used", std::to_string(run.embedding.k_tilde));
  header.emplace_back("mu_star", format_double(run.embedding.mu_star));
  write_matrix_csv((dir / "embedding.csv").string(), run.embedding.psi, header);
  if (c.binary_embedding) {
    const MatrixXd rowmajor_t = run.embedding.psi.transpose();  // column-major storage of the transpose is row-major psi
    write_f64_le((dir / "embedding.bin").string(),
                 std::vector<double>(rowmajor_t.data(), rowmajor_t.data() + rowmajor_t.size()));
    files.push_back("embedding.bin");
  }
  json j{{"config", config_json(c)},
         {"n", run.adjacency.n()},
         {"k", run.problem.k},
         {"k_tilde", run.embedding.k_tilde},
         {"mu_star", run.solution.mu_smoothed},
         {"mu_last", run.solution.mu},
         {"trace_relative_error", nullable(run.trace_relative_error)},
         {"verify_probes", c.verify_probes}};
  if (run.gram) {
    j["gram_relative_frobenius"] = nullable(run.gram->relative_frobenius);
    j["gram_max_scaled_deviation"] = nullable(run.gram->max_scaled_deviation);
    j["gram_max_deviation"] = nullable(run.gram->max_deviation);
  }
  write_json(dir / "validation.json", j);
  return files;
}

std::vector<std::string> run_solve_diagonal_command(const ExperimentConfig& c, const fs::path& dir) {
  MatrixPtr C;
  if (c.graph.empty()) {
    const auto seeds = MaxCutSeeds::derive(c.seed);
    C = erdos_renyi(c.n, c.p < 0 ? 3.0 / double(c.n) : c.p, seeds.graph).cost;
  } else {
    C = std::make_shared<const SparseSymMatrixd>(read_edge_list(c.graph));
  }
  if (c.mode == "exact" && C->n() > kDenseCap) throw std::invalid_argument("exact mode needs n <= 512");
  DiagonalProblem problem{C, VectorXd::Constant(C->n(), c.b), c.beta};
  auto sol = solve_diagonal(problem, solve_config(c));
  prepend_config(sol.trajectory, c);
  sol.trajectory.write_csv((dir / "trajectory.csv").string());
  json j{{"config", config_json(c)},
         {"n", C->n()},
         {"unregularized_dual_objective", problem.b.dot(sol.lambda)},
         {"lambda_norm", sol.lambda.norm()},
         {"lambda_min", sol.lambda.minCoeff()},
         {"lambda_max", sol.lambda.maxCoeff()},
         {"final_residual_estimate", sol.trajectory.records.back().residual}};
  if (C->n() <= kDenseCap) {
    j["dual_objective_exact"] = dual_objective_exact(problem, sol.lambda);
    j["residual_exact"] = dual_gradient_exact(problem, sol.lambda).cwiseAbs().maxCoeff();
  }
  write_json(dir / "result.json", j);
  std::vector<std::string> files{"trajectory.csv", "result.json"};
  if (c.save_lambda) {
    sol.trajectory.write_snapshots((dir / "lambda.bin").string());
    files.push_back("lambda.bin");
  }
  return files;
}

std::vector<std::string> run_solve_trace_command(const ExperimentConfig& c, const fs::path& dir) {
  MatrixPtr C;
  double k = c.k;
  if (c.graph.empty()) {
    const auto seeds = EmbedSeeds::derive(c.seed);
    auto A = clustered_graph({c.n, c.m, c.inter_p, seeds.graph});
    C = std::make_shared<const SparseSymMatrixd>(normalized_laplacian(A));
    if (k <= 0) k = double(c.n / c.m);
  } else {
    auto G = read_edge_list(c.graph);
    C = std::make_shared<const SparseSymMatrixd>(c.laplacian ? normalized_laplacian(G) : std::move(G));
  }
  SpectralInterval<double> iv = gershgorin_interval(*C);
  if (c.interval_upper > c.interval_lower) iv = {c.interval_lower, c.interval_upper};
  else if (c.graph.empty() || c.laplacian) iv = {0, 2};
  if (c.mode == "exact" && C->n() > kDenseCap) throw std::invalid_argument("exact mode needs n <= 512");

  TraceProblem problem{C, k, c.beta, iv};
  auto sol = solve_trace(problem, solve_config(c));
  prepend_config(sol.trajectory, c);
  sol.trajectory.write_csv((dir / "trajectory.csv").string());
  json j{{"config", config_json(c)},
         {"n", C->n()},
         {"k", k},
         {"interval", {iv.lower, iv.upper}},
         {"mu_last", sol.mu},
         {"mu_smoothed", sol.mu_smoothed}};
  if (C->n() <= kDenseCap) {
    const auto d = trace_derivatives_exact(problem, sol.mu_smoothed);
    j["trace_X_exact"] = d.trace_X;
    j["trace_relative_error_exact"] = std::abs(d.trace_X - k) / k;
  }
  write_json(dir / "result.json", j);
  return {"trajectory.csv", "result.json"};
}

std::vector<std::string> run_estimator_bench_command(const ExperimentConfig& c, const fs::path& dir) {
  const Index n = c.n;
  std::optional<GibbsFactorOperatord> Y;
  DenseGibbs<double> ref;
  if (c.instance == "maxcut") {
    const auto seeds = MaxCutSeeds::derive(c.seed);
    auto inst = erdos_renyi(n, c.p < 0 ? 3.0 / double(n) : c.p, seeds.graph);
    const auto op = DualShiftedOperatord::diagonal(inst.cost, VectorXd::Zero(n));
    Y = GibbsFactorOperatord::half_exponential(op, c.beta, c.expmv_tol);
    ref = dense_reference(op, c.beta, GibbsKind::HalfExponential);
  } else {
    const auto seeds = EmbedSeeds::derive(c.seed);
    auto L = std::make_shared<const SparseSymMatrixd>(normalized_laplacian(clustered_graph({n, c.m, -1, seeds.graph})));
    const auto op = DualShiftedOperatord::scalar(L, 1.0);
    Y = GibbsFactorOperatord::sqrt_fermi_dirac(op, c.beta, {-2, 2}, c.cheb_tol);
    ref = dense_reference(op, c.beta, GibbsKind::SqrtFermiDirac);
  }
  const VectorXd d = ref.X.diagonal();
  const auto dist = c.probes == "rademacher" ? ProbeDistribution::Rademacher : ProbeDistribution::Gaussian;

  std::ofstream out(dir / "estimator_bench.csv");
  if (!out) throw std::runtime_error("cannot open estimator_bench.csv");
  for (const auto& [k, v] : c.echo()) out << "# " << k << '=' << v << '\n';
  out << "N,trials,median_rel_error,mean_rel_error,rms_rel_error,predicted_rms_rel_error\n";
  for (long long N : c.bench_batches) {
    std::vector<double> errs;
    for (long long t = 0; t < c.trials; ++t) {
      const auto probes = draw_probes<double>(n, N, c.seed, std::uint64_t(t), dist);
      errs.push_back((diag_estimate(*Y, probes).a - d).norm() / d.norm());
    }
    double mean = 0, ms = 0;
    for (double e : errs) {
      mean += e;
      ms += e * e;
    }
    mean /= double(errs.size());
    ms /= double(errs.size());
    std::sort(errs.begin(), errs.end());
    const std::size_t h = errs.size() / 2;
    const double median = errs.size() % 2 ? errs[h] : (errs[h - 1] + errs[h]) / 2;
    // Var a_i = 2 X_ii^2 / N for Gaussian probes, so E||a - d||^2 / ||d||^2 = 2 / N
    out << N << ',' << c.trials << ',' << format_double(median) << ',' << format_double(mean) << ','
        << format_double(std::sqrt(ms)) << ',' << format_double(std::sqrt(2.0 / double(N))) << '\n';
  }
  return {"estimator_bench.csv"};
}

void prepare_output_dir(const ExperimentConfig& c) {
  const fs::path dir(c.out);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("output path exists and is not a directory: " + c.out, "");
    if (!fs::is_empty(dir) && !c.force)
      throw ConfigError("output directory " + c.out + " is not empty (use --force to overwrite)", "");
  }
  fs::create_directories(dir);
}

}  // namespace

int run(const ExperimentConfig& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
  try {
    prepare_output_dir(c);
  } catch (const ConfigError& e) {
    std::cerr << "ersdp: " << e.what() << '\n';
    return 2;
  }
  const fs::path dir(c.out);
  const auto start = std::chrono::steady_clock::now();
  try {
    std::vector<std::string> files;
    if (c.command == "maxcut")
      files = run_maxcut_command(c, dir);
    else if (c.command == "embed")
      files = run_embed_command(c, dir);
    else if (c.command == "solve-diagonal")
      files = run_solve_diagonal_command(c, dir);
    else if (c.command == "solve-trace")
      files = run_solve_trace_command(c, dir);
    else if (c.command == "estimator-bench")
      files = run_estimator_bench_command(c, dir);
    else
      throw std::invalid_argument("unknown command " + c.command);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    files.push_back("manifest.json");
    json manifest{{"command", c.command},
                  {"config", config_json(c)},
                  {"versions",
                   {{"ersdp", "0.1.0"},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"compiler", __VERSION__}}},
                  {"wall_seconds", wall},
                  {"outputs", files}};
    write_json(dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    std::cerr << "ersdp " << c.command << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ersdp::cli
