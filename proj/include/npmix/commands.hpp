#pragma once

#include <boost/crc.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "npmix/benchmark.hpp"
#include "npmix/config.hpp"
#include "npmix/datasets.hpp"
#include "npmix/io.hpp"
#include "npmix/pipeline.hpp"
#include "npmix/separation.hpp"
#include "npmix/transport.hpp"

namespace npmix {

inline constexpr const char* kToolVersion = "1.0.0";

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::uint32_t crc32(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

inline std::string hex32(std::uint32_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(8) << std::setfill('0') << v;
  return ss.str();
}

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream ss;
  w(ss);
  return ss.str();
}

}  // namespace detail

/// Collects the files of one run and writes them together with manifest.json,
/// which records the command, seed, canonical config and a size and CRC-32
/// per file.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path dir, std::string command, const RunConfig& cfg)
      : dir_(std::move(dir)), command_(std::move(command)), cfg_(cfg) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create '" + dir_.string() + "': " + ec.message());
  }

  void add(const std::string& name, std::string content) {
    detail::write_file(dir_ / name, content);
    files_[name] = std::move(content);
  }

  const std::filesystem::path& path() const { return dir_; }

  void finish() {
    Json files = Json::array();
    for (const auto& [name, content] : files_)
      files.push_back(Json{{"name", name}, {"bytes", content.size()}, {"crc32", detail::hex32(detail::crc32(content))}});
    const Json manifest{{"tool", "npmix"},
                        {"version", kToolVersion},
                        {"command", command_},
                        {"seed", cfg_.seed},
                        {"config", render_config(cfg_, false)},
                        {"files", files}};
    detail::write_file(dir_ / "manifest.json", dump(manifest));
  }

 private:
  std::filesystem::path dir_;
  std::string command_;
  RunConfig cfg_;
  std::map<std::string, std::string> files_;
};

/// Command and config recorded in a manifest, for replay.
inline std::pair<std::string, RunConfig> load_manifest(const std::string& path) {
  const Json m = read_json_file(path);
  if (!m.contains("command") || !m.contains("config")) throw InvalidArgument("'" + path + "' is not a run manifest");
  return {m.at("command").get<std::string>(), parse_config(m.at("config").get<std::string>())};
}

namespace detail {

inline std::string histogram_line(const std::vector<int>& labels) {
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  std::ostringstream ss;
  for (const auto& [label, count] : counts) ss << ' ' << label + 1 << ':' << count;
  return ss.str();
}

inline LabeledSample load_input(const RunConfig& cfg) {
  if (!cfg.input.empty()) return read_sample_csv(cfg.input);
  if (!cfg.dataset.empty()) {
    if (cfg.n < 1) throw InvalidArgument("a dataset source needs n >= 1");
    return generate(cfg.dataset_spec_for(cfg.dataset), cfg.n);
  }
  throw InvalidArgument("no input: give an input CSV or a dataset");
}

inline std::vector<std::pair<double, double>> grid_bounds_for(const RunConfig& cfg, const Matrix& points) {
  if (!cfg.grid_bounds.empty()) {
    if (static_cast<Eigen::Index>(cfg.grid_bounds.size()) != points.cols())
      throw DimensionError("grid bounds dimension differs from the data");
    return cfg.grid_bounds;
  }
  std::vector<std::pair<double, double>> out;
  for (Eigen::Index a = 0; a < points.cols(); ++a) {
    const double lo = points.col(a).minCoeff(), hi = points.col(a).maxCoeff();
    const double pad = hi > lo ? 0.1 * (hi - lo) : 1.0;
    out.emplace_back(lo - pad, hi + pad);
  }
  return out;
}

}  // namespace detail

/// Writes n labeled draws to <output_dir>/data.csv.
inline LabeledSample cmd_generate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.dataset.empty()) throw InvalidArgument("generate: a dataset name is required");
  if (cfg.output_dir.empty()) throw InvalidArgument("generate: an output directory is required");
  const DatasetSpec spec = cfg.dataset_spec_for(cfg.dataset);
  const LabeledSample data = generate(spec, cfg.n);
  RunDirectory dir(cfg.output_dir, "generate", cfg);
  dir.add("data.csv", detail::render([&](std::ostream& o) { write_sample_csv(o, data); }));
  dir.finish();
  log << "wrote " << data.size() << " rows to " << (dir.path() / "data.csv").string() << '\n';
  log << "label histogram:" << detail::histogram_line(*data.labels) << '\n';
  return data;
}

/// Full NPMIX run on a CSV (or generated) sample; writes every artifact.
inline NpmixResult cmd_cluster(const RunConfig& cfg, std::ostream& log) {
  if (cfg.output_dir.empty()) throw InvalidArgument("cluster: an output directory is required");
  if (cfg.k < 1) throw InvalidArgument("cluster: K must be >= 1");
  const LabeledSample data = detail::load_input(cfg);
  NpmixResult r = run_npmix(data.points, cfg.npmix_options());
  const auto classes = r.partition.classify_rows(data.points);

  RunDirectory dir(cfg.output_dir, "cluster", cfg);
  dir.add("model.json", dump(model_json(r)));
  dir.add("distmat.csv", detail::render([&](std::ostream& o) { write_distance_csv(o, r.distances); }));
  dir.add("dendrogram.csv", detail::render([&](std::ostream& o) { write_dendrogram_csv(o, r.tree); }));
  dir.add("assignment.json", dump(assignment_json(r.assignment)));
  dir.add("labels.csv", detail::render([&](std::ostream& o) { write_labels_csv(o, classes); }));
  if (data.dim() <= 2) {
    const PartitionGrid grid = partition_grid(r.partition, detail::grid_bounds_for(cfg, data.points), cfg.grid_res);
    dir.add("grid.csv", detail::render([&](std::ostream& o) { write_grid_csv(o, grid); }));
    dir.add("grid.svg", detail::render([&](std::ostream& o) { write_grid_svg(o, grid); }));
  }
  dir.finish();

  log << "n=" << data.size() << " d=" << data.dim() << " L=" << r.em.components << " K=" << cfg.k << '\n';
  log << "log-likelihood " << format_double(r.fit.log_likelihood) << " after " << r.fit.iterations << " iterations"
      << (r.fit.converged ? "" : " (not converged)") << ", restart " << r.fit.restart_index << '\n';
  log << "cluster sizes:" << detail::histogram_line(r.labels) << '\n';
  if (data.labels) log << "ARI vs input labels " << format_double(ari(*data.labels, r.labels)) << '\n';
  log << "outputs in " << dir.path().string() << '\n';
  return r;
}

struct DiagnoseReport {
  SeparationReport population;
  std::optional<SeparationReport> fitted;
  std::optional<ThresholdReport> thresholds;
  std::optional<double> wasserstein;
  std::optional<std::string> precision_error;
  Json json;
};

/// Separation diagnostics for a generator and, when a fitted model is
/// given, for that model's grouping aligned with the generator's atoms.
inline DiagnoseReport cmd_diagnose(const RunConfig& cfg, std::ostream& log) {
  if (cfg.dataset.empty()) throw InvalidArgument("diagnose: a generator dataset is required");
  const DatasetSpec spec = cfg.dataset_spec_for(cfg.dataset);
  const GeneratorModel gen = generator_model(spec);
  if (!gen.population) throw InvalidArgument("diagnose: dataset '" + spec.name + "' is not a mixture of Gaussian mixtures");
  const MixingMeasure& truth = *gen.population;

  DiagnoseReport rep;
  Json j{{"generator", spec.name}, {"K", truth.size()}};
  auto separation_json = [](const SeparationReport& s) {
    Json o{{"eta", s.eta},
           {"diameter_term", s.diameter_term},
           {"approximation_term", s.approximation_term},
           {"max_within", s.max_within},
           {"satisfied", s.satisfied},
           {"vacuous", s.vacuous}};
    o["min_between"] = std::isfinite(s.min_between) ? Json(s.min_between) : Json(nullptr);
    o["xi_margin"] = std::isfinite(s.xi_margin) ? Json(s.xi_margin) : Json(nullptr);
    return o;
  };
  try {
    rep.population = population_eta(truth, cfg.quad, cfg.n_dirichlet, cfg.seed);
    j["population"] = separation_json(rep.population);

    if (!cfg.model.empty()) {
      const Json model = read_json_file(cfg.model);
      const GaussianMixture fitted = mixture_from_json(model.at("mixture"));
      const Assignment alpha_hat = assignment_from_json(model.at("assignment"));
      const MixingMeasure grouped = measure_from_json(model.at("partition"));
      if (fitted.dim() != truth.dim()) throw DimensionError("diagnose: model and generator dimensions differ");
      if (alpha_hat.groups() != truth.size()) throw InvalidArgument("diagnose: model K differs from generator K");
      // Align fitted groups with generator atoms through labels on a shared sample.
      const LabeledSample probe = sample(truth, cfg.mc_n, cfg.seed);
      const auto perm = match_clusters(*probe.labels, PartitionModel(grouped).labels(probe.points));
      std::vector<int> aligned;
      for (int g : alpha_hat.map()) aligned.push_back(perm[g]);
      const Assignment alpha(aligned, truth.size());
      rep.fitted = eta(truth, fitted, alpha, cfg.quad, cfg.n_dirichlet, cfg.seed);
      j["fitted"] = separation_json(*rep.fitted);
      rep.thresholds = threshold_check(distance_matrix(fitted), alpha, rep.fitted->eta);
      Json violations = Json::array();
      for (const auto& v : rep.thresholds->violations)
        violations.push_back(Json{{"i", v.i + 1}, {"j", v.j + 1}, {"distance", v.distance}, {"same_group", v.same_group}});
      j["thresholds"] = Json{{"ok", rep.thresholds->ok}, {"violations", violations}};
      rep.wasserstein = wasserstein(group(fitted, alpha), truth, cfg.r_wasserstein, cfg.quad);
      j["wasserstein"] = Json{{"r", cfg.r_wasserstein}, {"distance", *rep.wasserstein}};
    }
  } catch (const PrecisionError& e) {
    rep.precision_error = e.what();
    j["precision_error"] = Json{{"message", e.what()}, {"value", e.value()}, {"error_estimate", e.error_estimate()}};
  }
  rep.json = j;

  auto print = [&](const char* title, const SeparationReport& s) {
    log << title << ":\n";
    log << "  eta: " << format_double(s.eta) << " (diameter " << format_double(s.diameter_term) << ", approximation "
        << format_double(s.approximation_term) << ")\n";
    if (s.vacuous) {
      log << "  satisfied: true (vacuous, K = 1)\n";
      return;
    }
    log << "  min between-group distance: " << format_double(s.min_between) << '\n';
    log << "  xi margin: " << format_double(s.xi_margin) << '\n';
    log << "  satisfied: " << (s.satisfied ? "true" : "false") << '\n';
  };
  log << "generator " << spec.name << " (K=" << truth.size() << ")\n";
  if (j.contains("population")) print("population", rep.population);
  if (rep.fitted) print("fitted model", *rep.fitted);
  if (rep.thresholds) {
    log << "threshold dichotomy (within <= eta, between >= 2 eta): " << (rep.thresholds->ok ? "holds" : "fails");
    if (!rep.thresholds->ok) log << " (" << rep.thresholds->violations.size() << " violating pairs)";
    log << '\n';
  }
  if (rep.wasserstein) log << "W_" << format_double(cfg.r_wasserstein) << " to generator: " << format_double(*rep.wasserstein) << '\n';
  if (rep.precision_error) log << "quadrature precision failure: " << *rep.precision_error << '\n';

  if (!cfg.output_dir.empty()) {
    RunDirectory dir(cfg.output_dir, "diagnose", cfg);
    dir.add("diagnose.json", dump(j));
    dir.finish();
  }
  return rep;
}

inline const std::vector<std::string>& default_benchmark_datasets() {
  static const std::vector<std::string> names{"moons_balanced", "moons_unbalanced", "target"};
  return names;
}

/// Table-style benchmark: per-run CSV plus a method x dataset summary.
inline BenchmarkOutput cmd_benchmark(const RunConfig& cfg, std::ostream& log) {
  if (cfg.output_dir.empty()) throw InvalidArgument("benchmark: an output directory is required");
  const auto methods = cfg.methods.empty() ? method_names() : cfg.methods;
  for (const auto& m : methods)
    if (std::find(method_names().begin(), method_names().end(), m) == method_names().end())
      throw InvalidArgument("benchmark: unknown method '" + m + "'");
  std::vector<DatasetSpec> specs;
  for (const auto& name : cfg.datasets.empty() ? default_benchmark_datasets() : cfg.datasets)
    specs.push_back(cfg.dataset_spec_for(name));
  const int n = cfg.n > 0 ? cfg.n : 2000;
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  NpmixOptions opt = cfg.npmix_options();
  BenchmarkOutput out = run_benchmark(methods, specs, cfg.runs, n, cfg.seed, threads, opt);

  RunDirectory dir(cfg.output_dir, "benchmark", cfg);
  dir.add("runs.csv", detail::render([&](std::ostream& o) { write_benchmark_runs_csv(o, out.runs, cfg.timing); }));
  dir.add("summary.csv", detail::render([&](std::ostream& o) { write_benchmark_summary_csv(o, out.results); }));
  dir.finish();

  log << std::left << std::setw(16) << "method" << std::setw(18) << "dataset" << std::right << std::setw(8) << "mean"
      << std::setw(8) << "median" << std::setw(8) << "std" << std::setw(8) << "failed" << '\n';
  for (const auto& r : out.results) {
    log << std::left << std::setw(16) << r.method << std::setw(18) << r.dataset << std::right << std::fixed
        << std::setprecision(3) << std::setw(8) << r.mean_ari << std::setw(8) << r.median_ari << std::setw(8)
        << r.std_ari << std::setw(8) << r.failures << '\n';
    log.unsetf(std::ios::fixed);
  }
  log << "outputs in " << dir.path().string() << '\n';
  return out;
}

}  // namespace npmix
