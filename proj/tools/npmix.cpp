// npmix command-line tool: generate, cluster, diagnose, benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or model failure.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "npmix/npmix.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct Flags {
  std::string config;
  std::optional<std::string> input, output_dir, dataset, model, cluster;
  std::optional<int> k, l, n, runs, threads, grid_res;
  std::optional<std::uint64_t> seed;
  std::optional<double> r_wasserstein, ridge_scale;
  std::vector<std::string> params, methods, datasets;
  bool timing = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "INI config file, or a manifest.json to replay");
  cmd->add_option("--input", f.input, "input CSV (header row, optional trailing 'label' column)");
  cmd->add_option("--output-dir", f.output_dir, "directory for the run's output files");
  cmd->add_option("--k", f.k, "number of clusters K");
  cmd->add_option("--l", f.l, "number of overfitted components L (default min(5K+10, n/20))");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--n", f.n, "sample size");
  cmd->add_option("--runs", f.runs, "benchmark runs per method and dataset");
  cmd->add_option("--threads", f.threads, "worker threads (default: available cores)");
  cmd->add_option("--grid-res", f.grid_res, "partition grid cells per axis");
  cmd->add_option("--r-wasserstein", f.r_wasserstein, "order r of the Wasserstein distance");
  cmd->add_option("--dataset", f.dataset, "named generator")
      ->check(CLI::IsMember(npmix::dataset_names()));
  cmd->add_option("--param", f.params, "generator parameter override key=value (repeatable)");
  cmd->add_option("--model", f.model, "model.json written by 'cluster'");
  cmd->add_option("--cluster", f.cluster, "component grouping: single_linkage, complete_linkage, kmeans_means")
      ->check(CLI::IsMember({"single_linkage", "complete_linkage", "kmeans_means"}));
  cmd->add_option("--ridge-scale", f.ridge_scale, "covariance ridge as a multiple of the median squared distance");
  cmd->add_option("--methods", f.methods, "benchmark methods")->delimiter(',');
  cmd->add_option("--datasets", f.datasets, "benchmark datasets")->delimiter(',');
  cmd->add_flag("--timing", f.timing, "record wall-clock times in runs.csv");
}

npmix::RunConfig build_config(const std::string& command, const Flags& f) {
  npmix::RunConfig cfg;
  if (!f.config.empty()) {
    if (f.config.size() > 5 && f.config.substr(f.config.size() - 5) == ".json") {
      auto [recorded, replay] = npmix::load_manifest(f.config);
      if (recorded != command)
        throw npmix::InvalidArgument("manifest records command '" + recorded + "', not '" + command + "'");
      cfg = replay;
    } else {
      std::ifstream in(f.config);
      if (!in) throw npmix::InvalidArgument("cannot open config '" + f.config + "'");
      std::ostringstream text;
      text << in.rdbuf();
      cfg = npmix::parse_config(text.str());
    }
  }
  if (f.input) cfg.input = *f.input;
  if (f.output_dir) cfg.output_dir = *f.output_dir;
  if (f.dataset) cfg.dataset = *f.dataset;
  if (f.model) cfg.model = *f.model;
  if (f.cluster) cfg.cluster = npmix::cluster_function_from(*f.cluster);
  if (f.k) cfg.k = *f.k;
  if (f.l) cfg.l = *f.l;
  if (f.n) cfg.n = *f.n;
  if (f.runs) cfg.runs = *f.runs;
  if (f.threads) cfg.threads = *f.threads;
  if (f.grid_res) cfg.grid_res = *f.grid_res;
  if (f.seed) cfg.seed = *f.seed;
  if (f.r_wasserstein) cfg.r_wasserstein = *f.r_wasserstein;
  if (f.ridge_scale) cfg.ridge_scale = *f.ridge_scale;
  if (!f.methods.empty()) cfg.methods = f.methods;
  if (!f.datasets.empty()) cfg.datasets = f.datasets;
  if (f.timing) cfg.timing = true;
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw npmix::InvalidArgument("--param expects key=value, got '" + kv + "'");
    cfg.dataset_params[kv.substr(0, eq)] = npmix::parse_double(kv.substr(eq + 1));
  }

  if (cfg.l > 0 && cfg.k > cfg.l) throw npmix::InvalidArgument("K must not exceed L");
  if (cfg.k < 0 || cfg.l < 0 || cfg.n < 0) throw npmix::InvalidArgument("K, L and n must be non-negative");
  if (cfg.runs < 1) throw npmix::InvalidArgument("runs must be positive");
  if (cfg.grid_res < 2) throw npmix::InvalidArgument("grid resolution must be at least 2");
  if (!(cfg.r_wasserstein >= 1.0)) throw npmix::InvalidArgument("r must be >= 1");
  if (command == "cluster" && cfg.k < 1) throw npmix::InvalidArgument("cluster needs --k");
  if (command == "generate" && (cfg.dataset.empty() || cfg.n < 1))
    throw npmix::InvalidArgument("generate needs --dataset and --n");
  if (command == "diagnose" && cfg.dataset.empty()) throw npmix::InvalidArgument("diagnose needs --dataset");
  if (command != "diagnose" && cfg.output_dir.empty()) throw npmix::InvalidArgument(command + " needs --output-dir");
  if (!cfg.dataset.empty()) cfg.dataset_spec_for(cfg.dataset);  // validates parameter names
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric mixture clustering via overfitted Gaussian mixtures"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::string> commands{"generate", "cluster", "diagnose", "benchmark"};
  const std::map<std::string, std::string> help{
      {"generate", "write a labeled sample from a named generator"},
      {"cluster", "fit, group and classify a sample; write all artifacts"},
      {"diagnose", "separation report for a generator and optionally a fitted model"},
      {"benchmark", "ARI of every method over repeated generated samples"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    subs[c] = app.add_subcommand(c, help.at(c));
    add_flags(subs[c], flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  std::string command;
  for (const auto& c : commands)
    if (subs[c]->parsed()) command = c;

  npmix::RunConfig cfg;
  try {
    cfg = build_config(command, flags);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (command == "generate") {
      npmix::cmd_generate(cfg, std::cout);
    } else if (command == "cluster") {
      npmix::cmd_cluster(cfg, std::cout);
    } else if (command == "diagnose") {
      const auto rep = npmix::cmd_diagnose(cfg, std::cout);
      if (rep.precision_error) return kRuntimeError;
    } else {
      npmix::cmd_benchmark(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
