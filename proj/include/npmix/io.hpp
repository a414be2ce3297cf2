#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "npmix/benchmark.hpp"
#include "npmix/hellinger.hpp"
#include "npmix/linkage.hpp"
#include "npmix/partition.hpp"
#include "npmix/pipeline.hpp"

namespace npmix {

using Json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) throw InvalidArgument("not a number: '" + text + "'");
  return v;
}

// ---- JSON ----------------------------------------------------------------

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

inline Json to_json(const GaussianComponent& c) {
  return Json{{"mean", to_json(c.mean())}, {"covariance", to_json(c.covariance())}};
}

inline Json to_json(const GaussianMixture& q) {
  Json comps = Json::array();
  for (const auto& c : q.components()) comps.push_back(to_json(c));
  return Json{{"weights", q.weights()}, {"components", comps}};
}

inline Json to_json(const MixingMeasure& m) {
  Json atoms = Json::array();
  for (const auto& a : m.atoms()) atoms.push_back(to_json(a));
  return Json{{"weights", m.weights()}, {"atoms", atoms}};
}

inline Json to_json(const EmConfig& cfg) {
  return Json{{"components", cfg.components}, {"max_iters", cfg.max_iters}, {"tol", cfg.tol},
              {"cov_ridge", cfg.cov_ridge},   {"weight_floor", cfg.weight_floor}, {"restarts", cfg.restarts},
              {"seed", cfg.seed}};
}

inline Json fit_meta_json(const FitResult& fit, const EmConfig& cfg) {
  return Json{{"log_likelihood", fit.log_likelihood},
              {"iterations", fit.iterations},
              {"converged", fit.converged},
              {"restart_index", fit.restart_index},
              {"config", to_json(cfg)}};
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("JSON: expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("JSON: expected a non-empty array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw InvalidArgument("JSON: ragged matrix");
    m.row(i) = vector_from_json(j[i]).transpose();
  }
  return m;
}

inline GaussianComponent component_from_json(const Json& j) {
  return GaussianComponent(vector_from_json(j.at("mean")), matrix_from_json(j.at("covariance")));
}

inline GaussianMixture mixture_from_json(const Json& j) {
  std::vector<GaussianComponent> comps;
  for (const auto& c : j.at("components")) comps.push_back(component_from_json(c));
  return GaussianMixture(j.at("weights").get<std::vector<double>>(), std::move(comps));
}

inline MixingMeasure measure_from_json(const Json& j) {
  std::vector<GaussianMixture> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back(mixture_from_json(a));
  return MixingMeasure(j.at("weights").get<std::vector<double>>(), std::move(atoms));
}

/// 1-based group of each fitted component.
inline Json assignment_json(const Assignment& alpha) {
  std::vector<int> one_based;
  for (int g : alpha.map()) one_based.push_back(g + 1);
  return Json{{"groups", alpha.groups()}, {"assignment", one_based}};
}

inline Assignment assignment_from_json(const Json& j) {
  std::vector<int> map;
  for (int g : j.at("assignment").get<std::vector<int>>()) map.push_back(g - 1);
  return Assignment(std::move(map), j.at("groups").get<int>());
}

/// Everything cmd_cluster persists about the fitted model.
inline Json model_json(const NpmixResult& r) {
  return Json{{"mixture", to_json(r.fit.mixture)},
              {"fit_meta", fit_meta_json(r.fit, r.em)},
              {"assignment", assignment_json(r.assignment)},
              {"partition", to_json(r.measure)}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument("'" + path + "': " + e.what());
  }
}

// ---- CSV -----------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Header "x0,...,x{d-1}[,label]"; labels are written 1-based.
inline void write_sample_csv(std::ostream& out, const LabeledSample& s) {
  for (int a = 0; a < s.dim(); ++a) out << (a ? "," : "") << 'x' << a;
  if (s.labels) out << ",label";
  out << '\n';
  for (int i = 0; i < s.size(); ++i) {
    for (int a = 0; a < s.dim(); ++a) out << (a ? "," : "") << format_double(s.points(i, a));
    if (s.labels) out << ',' << (*s.labels)[i] + 1;
    out << '\n';
  }
}

/// Reads a header row then numeric rows; a trailing column named "label"
/// holds 1-based integer labels.
inline LabeledSample read_sample_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.empty()) throw InvalidArgument("CSV: empty header");
  const bool labeled = header.back() == "label";
  const int d = static_cast<int>(header.size()) - (labeled ? 1 : 0);
  if (d < 1) throw InvalidArgument("CSV: no coordinate columns");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InvalidArgument("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields");
    std::vector<double> row;
    try {
      for (int a = 0; a < d; ++a) row.push_back(parse_double(cells[a]));
      if (labeled) {
        const double lab = parse_double(cells.back());
        if (lab != std::floor(lab) || lab < 1) throw InvalidArgument("label must be a positive integer");
        labels.push_back(static_cast<int>(lab) - 1);
      }
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    for (double v : row)
      if (!std::isfinite(v)) throw InvalidArgument("CSV line " + std::to_string(line_no) + ": non-finite value");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("CSV: no data rows");
  LabeledSample s{Matrix(static_cast<Eigen::Index>(rows.size()), d), std::nullopt};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int a = 0; a < d; ++a) s.points(i, a) = rows[i][a];
  if (labeled) s.labels = std::move(labels);
  return s;
}

inline LabeledSample read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_sample_csv(in);
}

/// Full matrix, row-major, 17 significant digits.
inline void write_distance_csv(std::ostream& out, const DistanceMatrix& d) {
  for (int j = 0; j < d.size(); ++j) out << (j ? "," : "") << 'c' << j + 1;
  out << '\n';
  for (int i = 0; i < d.size(); ++i) {
    for (int j = 0; j < d.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", d(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

/// One row per merge. Leaves are 1..L and merge m creates cluster L + 1 + m.
inline void write_dendrogram_csv(std::ostream& out, const Dendrogram& tree) {
  out << "id_a,id_b,height\n";
  for (const auto& m : tree.merges) out << m.a + 1 << ',' << m.b + 1 << ',' << format_double(m.height) << '\n';
}

inline void write_labels_csv(std::ostream& out, const std::vector<Classification>& cls) {
  out << "index,label,margin\n";
  for (std::size_t i = 0; i < cls.size(); ++i)
    out << i + 1 << ',' << cls[i].label + 1 << ',' << format_double(cls[i].margin) << '\n';
}

inline void write_grid_csv(std::ostream& out, const PartitionGrid& g) {
  for (int a = 0; a < g.dim(); ++a) out << 'x' << a << ',';
  out << "label,margin\n";
  const Matrix pts = g.points();
  for (int c = 0; c < g.cells(); ++c) {
    for (int a = 0; a < g.dim(); ++a) out << format_double(pts(c, a)) << ',';
    out << g.labels[c] + 1 << ',' << format_double(g.margins[c]) << '\n';
  }
}

/// Flat colored raster of the grid labels: one rectangle per cell (a single
/// row of cells in 1-d).
inline void write_grid_svg(std::ostream& out, const PartitionGrid& g, int cell_px = 4) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const int cols = g.resolution;
  const int rows = g.dim() == 2 ? g.resolution : 1;
  const int height_px = g.dim() == 2 ? rows * cell_px : 40;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell_px << "\" height=\"" << height_px
      << "\" shape-rendering=\"crispEdges\">\n";
  for (int c = 0; c < g.cells(); ++c) {
    const int ix = c % cols;
    const int iy = c / cols;
    // SVG y grows downward; put x1 = lo at the bottom.
    const int y = g.dim() == 2 ? (rows - 1 - iy) * cell_px : 0;
    out << "<rect x=\"" << ix * cell_px << "\" y=\"" << y << "\" width=\"" << cell_px << "\" height=\""
        << (g.dim() == 2 ? cell_px : height_px) << "\" fill=\"" << palette[g.labels[c] % 10] << "\"/>\n";
  }
  out << "</svg>\n";
}

inline void write_benchmark_runs_csv(std::ostream& out, const std::vector<BenchmarkRun>& runs, bool timing) {
  out << "method,dataset,run,seed,ari,wall_ms,failed\n";
  for (const auto& r : runs)
    out << r.method << ',' << r.dataset << ',' << r.run + 1 << ',' << r.seed << ',' << format_double(r.ari) << ','
        << (timing ? format_double(std::round(r.wall_ms * 1000.0) / 1000.0) : std::string("NA")) << ','
        << (r.failed ? 1 : 0) << '\n';
}

inline void write_benchmark_summary_csv(std::ostream& out, const std::vector<BenchmarkResult>& results) {
  out << "method,dataset,runs,mean_ari,median_ari,std_ari,failures\n";
  for (const auto& r : results)
    out << r.method << ',' << r.dataset << ',' << r.runs << ',' << format_double(r.mean_ari) << ','
        << format_double(r.median_ari) << ',' << format_double(r.std_ari) << ',' << r.failures << '\n';
}

}  // namespace npmix
