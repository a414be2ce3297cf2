#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "npmix/datasets.hpp"
#include "npmix/io.hpp"
#include "npmix/pipeline.hpp"
#include "npmix/quadrature.hpp"

namespace npmix {

/// Every parameter a command can take. Read from an INI file with sections
/// [run], [data], [model], [quadrature], [grid], [diagnose], [benchmark];
/// command-line flags are applied on top.
struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = available cores
  std::string output_dir;

  // [data]
  std::string input;
  std::string dataset;
  int n = 0;
  std::map<std::string, double> dataset_params;

  // [model]
  int k = 0;
  int l = 0;  // 0 = default_components(k, n)
  int max_iters = 500;
  double tol = 1e-7;
  double ridge_scale = kDefaultRidgeScale;
  std::optional<double> cov_ridge;
  std::optional<double> weight_floor;
  int restarts = 5;
  ClusterFunction cluster = ClusterFunction::single_linkage;

  // [quadrature]
  QuadratureSpec quad;

  // [grid]
  int grid_res = 200;
  std::vector<std::pair<double, double>> grid_bounds;  // empty = data range padded by 10%

  // [diagnose]
  std::string model;
  double r_wasserstein = 1.0;
  int mc_n = 20000;
  int n_dirichlet = 256;

  // [benchmark]
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  int runs = 20;
  bool timing = false;

  bool operator==(const RunConfig&) const = default;

  NpmixOptions npmix_options() const {
    NpmixOptions o;
    o.K = k;
    o.L = l;
    o.seed = seed;
    o.max_iters = max_iters;
    o.restarts = restarts;
    o.tol = tol;
    o.ridge_scale = ridge_scale;
    o.cov_ridge = cov_ridge;
    o.weight_floor = weight_floor;
    o.cluster = cluster;
    return o;
  }

  DatasetSpec dataset_spec_for(const std::string& name) const {
    std::map<std::string, double> overrides;
    const DatasetSpec defaults = npmix::dataset_spec(name);
    for (const auto& [key, value] : dataset_params)
      if (defaults.params.count(key) || (name == "mog_family" && (key == "K" || key == "d"))) overrides[key] = value;
    return npmix::dataset_spec(name, seed, overrides);
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw InvalidArgument("config: '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidArgument("config: '" + key + "' expects true or false");
}

}  // namespace detail

/// Canonical INI text: fixed section and key order, shortest round-trip
/// numbers, unset optional keys omitted. When `with_output_dir` is false the
/// output directory is left out (the manifest stores the config this way so
/// identical runs in different directories record identical text).
inline std::string render_config(const RunConfig& c, bool with_output_dir = true) {
  std::ostringstream o;
  o << "[run]\nseed=" << c.seed << "\nthreads=" << c.threads << '\n';
  if (with_output_dir && !c.output_dir.empty()) o << "output_dir=" << c.output_dir << '\n';
  o << "\n[data]\n";
  if (!c.input.empty()) o << "input=" << c.input << '\n';
  if (!c.dataset.empty()) o << "dataset=" << c.dataset << '\n';
  o << "n=" << c.n << '\n';
  for (const auto& [key, value] : c.dataset_params) o << "param." << key << '=' << format_double(value) << '\n';
  o << "\n[model]\nk=" << c.k << "\nl=" << c.l << "\nmax_iters=" << c.max_iters << "\ntol=" << format_double(c.tol)
    << "\nridge_scale=" << format_double(c.ridge_scale) << '\n';
  if (c.cov_ridge) o << "cov_ridge=" << format_double(*c.cov_ridge) << '\n';
  if (c.weight_floor) o << "weight_floor=" << format_double(*c.weight_floor) << '\n';
  o << "restarts=" << c.restarts << "\ncluster=" << to_string(c.cluster) << '\n';
  o << "\n[quadrature]\npoints_per_axis=" << c.quad.points_per_axis << "\ntol=" << format_double(c.quad.tol)
    << "\nmax_refinements=" << c.quad.max_refinements << "\nbox_sigmas=" << format_double(c.quad.box_sigmas) << '\n';
  o << "\n[grid]\nresolution=" << c.grid_res << '\n';
  if (!c.grid_bounds.empty()) {
    o << "bounds=";
    for (std::size_t a = 0; a < c.grid_bounds.size(); ++a)
      o << (a ? "," : "") << format_double(c.grid_bounds[a].first) << ':' << format_double(c.grid_bounds[a].second);
    o << '\n';
  }
  o << "\n[diagnose]\n";
  if (!c.model.empty()) o << "model=" << c.model << '\n';
  o << "r_wasserstein=" << format_double(c.r_wasserstein) << "\nmc_n=" << c.mc_n << "\nn_dirichlet=" << c.n_dirichlet
    << '\n';
  o << "\n[benchmark]\n";
  if (!c.methods.empty()) o << "methods=" << detail::join_list(c.methods) << '\n';
  if (!c.datasets.empty()) o << "datasets=" << detail::join_list(c.datasets) << '\n';
  o << "runs=" << c.runs << "\ntiming=" << (c.timing ? "true" : "false") << '\n';
  return o.str();
}

/// Parses INI text over `base`; unknown sections or keys are rejected.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  RunConfig& c = base;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw InvalidArgument("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string where = section + "." + key;
      auto integer = [&] { return static_cast<int>(detail::parse_integer(where, v)); };
      auto real = [&] {
        try {
          return parse_double(v);
        } catch (const InvalidArgument&) {
          throw InvalidArgument("config: '" + where + "' expects a number, got '" + v + "'");
        }
      };
      if (section == "run") {
        if (key == "seed") c.seed = static_cast<std::uint64_t>(detail::parse_integer(where, v));
        else if (key == "threads") c.threads = integer();
        else if (key == "output_dir") c.output_dir = v;
        else throw InvalidArgument("config: unknown key '" + where + "'");
      } else if (section == "data") {
        if (key == "input") c.input = v;
        else if (key == "dataset") c.dataset = v;
        else if (key == "n") c.n = integer();
        else if (key.rfind("param.", 0) == 0) c.dataset_params[key.substr(6)] = real();
        else throw InvalidArgument("config: unknown key '" + where + "'");
      } else if (section == "model") {
        if (key == "k") c.k = integer();
        else if (key == "l") c.l = integer();
        else if (key == "max_iters") c.max_iters = integer();
        else if (key == "tol") c.tol = real();
        else if (key == "ridge_scale") c.ridge_scale = real();
        else if (key == "cov_ridge") c.cov_ridge = real();
        else if (key == "weight_floor") c.weight_floor = real();
        else if (key == "restarts") c.restarts = integer();
        else if (key == "cluster") c.cluster = cluster_function_from(v);
        else throw InvalidArgument("config: unknown key '" + where + "'");
      } else if (section == "quadrature") {
        if (key == "points_per_axis") c.quad.points_per_axis = integer();
        else if (key == "tol") c.quad.tol = real();
        else if (key == "max_refinements") c.quad.max_refinements = integer();
        else if (key == "box_sigmas") c.quad.box_sigmas = real();
        else throw InvalidArgument("config: unknown key '" + where + "'");
      } else if (section == "grid") {
        if (key == "resolution") {
          c.grid_res = integer();
        } else if (key == "bounds") {
          c.grid_bounds.clear();
          for (const auto& item : detail::split_list(v)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw InvalidArgument("config: grid bounds must look like lo:hi,lo:hi");
            c.grid_bounds.emplace_back(parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1)));
          }
        } else {
          throw InvalidArgument("config: unknown key '" + where + "'");
        }
      } else if (section == "diagnose") {
        if (key == "model") c.model = v;
        else if (key == "r_wasserstein") c.r_wasserstein = real();
        else if (key == "mc_n") c.mc_n = integer();
        else if (key == "n_dirichlet") c.n_dirichlet = integer();
        else throw InvalidArgument("config: unknown key '" + where + "'");
      } else if (section == "benchmark") {
        if (key == "methods") c.methods = detail::split_list(v);
        else if (key == "datasets") c.datasets = detail::split_list(v);
        else if (key == "runs") c.runs = integer();
        else if (key == "timing") c.timing = detail::parse_bool(where, v);
        else throw InvalidArgument("config: unknown key '" + where + "'");
      } else {
        throw InvalidArgument("config: unknown section [" + section + "]");
      }
    }
  }
  return c;
}

}  // namespace npmix
