#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "npmix/commands.hpp"
#include "npmix/evaluation.hpp"
#include "npmix/io.hpp"

using namespace npmix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run_cli(const std::string& args) {
  const std::string command = std::string(NPMIX_CLI_PATH) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return out;
  char buffer[4096];
  while (std::size_t got = std::fread(buffer, 1, sizeof buffer, pipe)) out.output.append(buffer, got);
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("npmix_cli_" + std::to_string(getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::vector<int> read_label_column(const std::string& labels_csv) {
  std::ifstream in(labels_csv);
  std::string line;
  std::getline(in, line);
  std::vector<int> out;
  while (std::getline(in, line)) out.push_back(std::stoi(split_csv_line(line).at(1)) - 1);
  return out;
}

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("frobnicate").code, 1);
  EXPECT_EQ(run_cli("cluster --no-such-flag").code, 1);
  EXPECT_EQ(run_cli("cluster --input x.csv --output-dir " + path("o")).code, 1);  // missing K
  EXPECT_EQ(run_cli("cluster --input x.csv --k 5 --l 3 --output-dir " + path("o")).code, 1);
  EXPECT_EQ(run_cli("generate --dataset poly --output-dir " + path("o")).code, 1);  // missing n
  EXPECT_EQ(run_cli("generate --dataset iris --n 10 --output-dir " + path("o")).code, 1);
  EXPECT_EQ(run_cli("benchmark --runs 0 --output-dir " + path("o")).code, 1);
}

TEST_F(Cli, RuntimeErrorsExitTwo) {
  EXPECT_EQ(run_cli("cluster --input " + path("missing.csv") + " --k 2 --output-dir " + path("o")).code, 2);
  std::ofstream(path("bad.csv")) << "x0,label\n1.0,1\nnot-a-number,2\n";
  EXPECT_EQ(run_cli("cluster --input " + path("bad.csv") + " --k 1 --output-dir " + path("o")).code, 2);
}

TEST_F(Cli, GenerateWritesDeterministicCsv) {
  const auto a = run_cli("generate --dataset moons_balanced --n 1000 --seed 5 --output-dir " + path("a"));
  const auto b = run_cli("generate --dataset moons_balanced --n 1000 --seed 5 --output-dir " + path("b"));
  ASSERT_EQ(a.code, 0) << a.output;
  ASSERT_EQ(b.code, 0) << b.output;
  const std::string text = slurp(path("a/data.csv"));
  EXPECT_EQ(text.substr(0, text.find('\n')), "x0,x1,label");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1001);
  EXPECT_EQ(text, slurp(path("b/data.csv")));
  EXPECT_EQ(slurp(path("a/manifest.json")), slurp(path("b/manifest.json")));
  EXPECT_NE(a.output.find("1000 rows"), std::string::npos);
}

TEST_F(Cli, TargetHistogramHasSixBins) {
  const auto r = run_cli("generate --dataset target --n 5000 --seed 1 --output-dir " + path("t"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto sample = read_sample_csv(path("t/data.csv"));
  std::set<int> labels(sample.labels->begin(), sample.labels->end());
  EXPECT_EQ(labels.size(), 6u);
  for (int k = 1; k <= 6; ++k) EXPECT_NE(r.output.find(" " + std::to_string(k) + ":"), std::string::npos);
}

TEST_F(Cli, ClusterSeparatedBlobs) {
  ASSERT_EQ(run_cli("generate --dataset mog_family --param K=2 --param d=2 --param atoms=1 --param gap=30 --n 500 "
                    "--output-dir " + path("g")).code, 0);
  const auto r = run_cli("cluster --input " + path("g/data.csv") + " --k 2 --l 10 --seed 3 --grid-res 40 --output-dir " +
                         path("c"));
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"model.json", "distmat.csv", "dendrogram.csv", "assignment.json", "labels.csv", "grid.csv",
                        "grid.svg", "manifest.json"})
    EXPECT_TRUE(fs::exists(path(std::string("c/") + f))) << f;
  const auto truth = read_sample_csv(path("g/data.csv"));
  EXPECT_EQ(ari(*truth.labels, read_label_column(path("c/labels.csv"))), 1.0);
  // 40 x 40 grid plus a header.
  const std::string grid = slurp(path("c/grid.csv"));
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 1601);
}

TEST_F(Cli, PersistedLabelsMatchPersistedModel) {
  ASSERT_EQ(run_cli("generate --dataset gumbel --n 600 --seed 2 --output-dir " + path("g")).code, 0);
  ASSERT_EQ(run_cli("cluster --input " + path("g/data.csv") + " --k 3 --seed 4 --output-dir " + path("c")).code, 0);
  const Json model = read_json_file(path("c/model.json"));
  const PartitionModel partition(measure_from_json(model.at("partition")));
  const auto data = read_sample_csv(path("g/data.csv"));
  EXPECT_EQ(partition.labels(data.points), read_label_column(path("c/labels.csv")));
  // The stored grouping reproduces the stored partition from the stored mixture.
  const auto regrouped = group(mixture_from_json(model.at("mixture")), assignment_from_json(model.at("assignment")));
  for (int k = 0; k < regrouped.size(); ++k)
    EXPECT_NEAR(regrouped.weight(k), partition.group_weights()[k], 1e-15);
}

TEST_F(Cli, ClusterRecoversGeneratorGroups) {
  ASSERT_EQ(run_cli("generate --dataset mog_family --n 4000 --seed 6 --output-dir " + path("g")).code, 0);
  ASSERT_EQ(run_cli("cluster --input " + path("g/data.csv") + " --k 3 --seed 6 --output-dir " + path("c")).code, 0);
  const Json model = read_json_file(path("c/model.json"));
  const auto fitted = mixture_from_json(model.at("mixture"));
  const auto alpha = assignment_from_json(model.at("assignment"));
  const auto truth = *generator_model(dataset_spec("mog_family")).population;
  // Group of the closest true component for each fitted component.
  std::vector<int> nearest_group(fitted.size());
  for (int l = 0; l < fitted.size(); ++l) {
    double best = 1e300;
    for (int k = 0; k < truth.size(); ++k)
      for (const auto& c : truth.atom(k).components()) {
        const double d = hellinger_gaussian(fitted.component(l), c);
        if (d < best) best = d, nearest_group[l] = k;
      }
  }
  EXPECT_TRUE(alpha.same_partition(Assignment(Assignment::canonical_labels(nearest_group), 3)));
}

TEST_F(Cli, ManifestReplayReproducesArtifacts) {
  ASSERT_EQ(run_cli("generate --dataset moons_balanced --n 400 --seed 8 --output-dir " + path("g")).code, 0);
  ASSERT_EQ(run_cli("cluster --input " + path("g/data.csv") + " --k 2 --seed 8 --grid-res 25 --output-dir " + path("a"))
                .code,
            0);
  const auto r = run_cli("cluster --config " + path("a/manifest.json") + " --output-dir " + path("b"));
  ASSERT_EQ(r.code, 0) << r.output;
  for (const auto& entry : fs::directory_iterator(path("a"))) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(slurp(entry.path()), slurp(path("b/" + name))) << name;
  }
  EXPECT_EQ(run_cli("generate --config " + path("a/manifest.json") + " --output-dir " + path("x")).code, 1);
}

TEST_F(Cli, ConfigRoundTrip) {
  RunConfig c;
  c.seed = 17;
  c.k = 3;
  c.l = 12;
  c.dataset = "gumbel";
  c.dataset_params = {{"spread", 6.5}};
  c.cov_ridge = 0.01;
  c.methods = {"npmix", "kmeans"};
  c.grid_bounds = {{-1.5, 2.0}, {0.0, 1.0}};
  const std::string text = render_config(c);
  const RunConfig back = parse_config(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(render_config(back), text);
  EXPECT_THROW(parse_config("[model]\nbogus=1\n"), InvalidArgument);
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  std::ofstream(path("run.ini")) << "[data]\ndataset=poly\nn=50\n\n[run]\nseed=1\n";
  ASSERT_EQ(run_cli("generate --config " + path("run.ini") + " --n 70 --output-dir " + path("g")).code, 0);
  const std::string text = slurp(path("g/data.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 71);
}

TEST_F(Cli, DiagnoseReportsSeparation) {
  const auto wide = run_cli("diagnose --dataset mog_family --param gap=20");
  EXPECT_EQ(wide.code, 0) << wide.output;
  EXPECT_NE(wide.output.find("satisfied: true"), std::string::npos) << wide.output;
  const auto narrow = run_cli("diagnose --dataset mog_family --param K=2 --param gap=0.5");
  EXPECT_EQ(narrow.code, 0);
  EXPECT_NE(narrow.output.find("satisfied: false"), std::string::npos) << narrow.output;
  const auto single = run_cli("diagnose --dataset mog_family --param K=1 --output-dir " + path("d"));
  EXPECT_EQ(single.code, 0);
  EXPECT_NE(single.output.find("vacuous"), std::string::npos) << single.output;
  const Json report = read_json_file(path("d/diagnose.json"));
  EXPECT_TRUE(report.dump().find("vacuous") != std::string::npos);
}

TEST_F(Cli, DiagnoseFittedModel) {
  ASSERT_EQ(run_cli("generate --dataset mog_family --n 3000 --seed 2 --output-dir " + path("g")).code, 0);
  ASSERT_EQ(run_cli("cluster --input " + path("g/data.csv") + " --k 3 --seed 2 --output-dir " + path("c")).code, 0);
  const auto r = run_cli("diagnose --dataset mog_family --model " + path("c/model.json") + " --seed 2");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("fitted"), std::string::npos) << r.output;
}

TEST_F(Cli, BenchmarkSmoke) {
  const auto r = run_cli("benchmark --datasets mog_family --param K=2 --param d=2 --param atoms=1 --param gap=30 "
                         "--runs 2 --n 300 --seed 4 --threads 2 --output-dir " + path("b"));
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream in(path("b/summary.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "method,dataset,runs,mean_ari,median_ari,std_ari,failures");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(parse_double(split_csv_line(line).at(3)), 1.0) << line;
  }
  EXPECT_EQ(rows, 5);
  const std::string runs = slurp(path("b/runs.csv"));
  EXPECT_EQ(runs.substr(0, runs.find('\n')), "method,dataset,run,seed,ari,wall_ms,failed");
}
