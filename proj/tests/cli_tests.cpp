#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "sparsear/csv.hpp"
#include "sparsear/synthetic.hpp"
#include "test_helpers.hpp"

using namespace sparsear;

namespace {

namespace fs = std::filesystem;

// Scratch directory per test case, removed on scope exit.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("sparsear_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

const char* cli_path() {
  const char* cli = std::getenv("SPARSEAR_CLI");
  REQUIRE_MESSAGE(cli != nullptr,
                  "SPARSEAR_CLI must point at the built binary");
  return cli;
}

int run_cli(const std::string& args, const std::string& capture = "") {
  std::string cmd = std::string("\"") + cli_path() + "\" " + args;
  if (capture.empty()) {
    cmd += " > /dev/null 2>&1";
  } else {
    cmd += " > " + capture + " 2>&1";
  }
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// key: value lines of a fit summary.
std::map<std::string, std::string> parse_summary(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing summary: " << path);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    kv[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return kv;
}

// Summary text with timing lines dropped, for rerun comparisons.
std::string strip_timings(const std::string& text) {
  std::string out;
  std::string::size_type start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    if (line.find("wall_time_s:") == std::string::npos) {
      out += line;
      out += '\n';
    }
    start = end + 1;
  }
  return out;
}

TimeSeries periodic_series(int period, int reps) {
  TimeSeries x;
  for (int t = 0; t < period * reps; ++t) {
    x.values.push_back(1.0 + ((t % period) * 7 % 5));
  }
  return x;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit sar finds an exact periodic lag") {
  TempDir dir("fit_sar");
  write_univariate(dir.file("x.csv"), periodic_series(3, 12));
  const std::string prefix = dir.file("fit");
  const int rc = run_cli("fit --model sar --input " + dir.file("x.csv") +
                         " --order 6 --sparsity 1 --solver mio --out-prefix " +
                         prefix);
  CHECK(rc == 0);

  const auto kv = parse_summary(prefix + ".summary.txt");
  CHECK(kv.at("model") == "sar");
  CHECK(kv.at("solver") == "mio");
  CHECK(kv.at("omega") == "3");
  CHECK(kv.at("certified") == "yes");
  CHECK(std::stod(kv.at("objective")) <= 1e-12);
  CHECK(kv.at("bigm_flagged") == "no");

  const SegmentFitTable table = read_segment_fit(prefix + ".coefficients.csv");
  CHECK(table.omega == std::vector<int>{3});
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].gamma == 1);
  CHECK(table.rows[0].k == 3);
  CHECK(table.rows[0].w == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit reads a named column") {
  TempDir dir("fit_column");
  std::ofstream out(dir.file("x.csv"));
  out << "t,v\n";
  const TimeSeries x = periodic_series(4, 10);
  for (std::size_t t = 0; t < x.values.size(); ++t) {
    out << (t + 1) << "," << format_double(x.values[t]) << "\n";
  }
  out.close();
  const std::string prefix = dir.file("fit");
  const int rc = run_cli("fit --model sar --input " + dir.file("x.csv") +
                         " --column v --order 6 --sparsity 1 --out-prefix " +
                         prefix);
  CHECK(rc == 0);
  CHECK(parse_summary(prefix + ".summary.txt").at("omega") == "4");
}

TEST_CASE("bad inputs exit with status 1") {
  TempDir dir("fit_bad");
  CHECK(run_cli("fit --model sar --input " + dir.file("absent.csv") +
                " --order 4 --sparsity 1") == 1);

  write_univariate(dir.file("x.csv"), periodic_series(3, 10));
  // sparsity above the order is a config error
  CHECK(run_cli("fit --model sar --input " + dir.file("x.csv") +
                " --order 4 --sparsity 9") == 1);
  // unknown solver is a flag-level error
  CHECK(run_cli("fit --model sar --input " + dir.file("x.csv") +
                " --order 4 --sparsity 1 --solver gurobi") == 1);
  // tvsar without a segment length
  CHECK(run_cli("fit --model tvsar --input " + dir.file("x.csv") +
                " --order 4 --sparsity 1") == 1);
}

TEST_CASE("require-certified turns a heuristic fit into exit 2") {
  TempDir dir("fit_exit2");
  write_univariate(dir.file("x.csv"), periodic_series(5, 12));
  const std::string base = "fit --model sar --input " + dir.file("x.csv") +
                           " --order 8 --sparsity 2 --solver nnsp";
  CHECK(run_cli(base) == 0);

  const std::string log = dir.file("log.txt");
  CHECK(run_cli(base + " --require-certified", log) == 2);
  CHECK(read_text(log).find("not certified") != std::string::npos);

  // The exact solver certifies and passes the gate.
  CHECK(run_cli("fit --model sar --input " + dir.file("x.csv") +
                " --order 8 --sparsity 2 --solver mio --require-certified") ==
        0);
}

TEST_CASE("tvsar reports segmentation and per-segment coefficients") {
  TempDir dir("fit_tvsar");
  SyntheticSpec spec;
  spec.length = 250;
  spec.lags = {{6, 0.8}};
  spec.noise = 0.05;
  spec.seed = 21;
  write_univariate(dir.file("x.csv"), gen_univariate(spec));

  const std::string prefix = dir.file("fit");
  const int rc = run_cli("fit --model tvsar --input " + dir.file("x.csv") +
                         " --order 8 --sparsity 1 --segment-length 60" +
                         " --out-prefix " + prefix);
  CHECK(rc == 0);
  const auto kv = parse_summary(prefix + ".summary.txt");
  CHECK(kv.at("segments") == "4");
  CHECK(kv.at("dropped_points") == "10");
  CHECK(kv.at("omega") == "6");
  CHECK(kv.at("certified") == "yes");

  const SegmentFitTable table = read_segment_fit(prefix + ".coefficients.csv");
  CHECK(table.omega == std::vector<int>{6});
  CHECK(table.rows.size() == 4);  // one nonzero weight per segment
  for (const SegmentFitRow& row : table.rows) {
    CHECK(row.k == 6);
    CHECK(row.w > 0.5);
  }
}

TEST_CASE("stvsar on a one-cell grid matches the sar fit") {
  TempDir dir("fit_1cell");
  SyntheticSpec spec;
  spec.length = 90;
  spec.lags = {{4, 0.7}};
  spec.noise = 0.2;
  spec.seed = 33;
  const TimeSeries x = gen_univariate(spec);
  write_univariate(dir.file("x.csv"), x);

  GridSeries g;
  g.rows = 1;
  g.cols = 1;
  g.num_segments = 1;
  g.seg_len = {static_cast<int>(x.values.size())};
  g.cells = {x.values};
  g.present = {1};
  write_grid(dir.file("grid.csv"), g);

  const std::string p_sar = dir.file("sar");
  const std::string p_stv = dir.file("stv");
  CHECK(run_cli("fit --model sar --input " + dir.file("x.csv") +
                " --order 8 --sparsity 2 --out-prefix " + p_sar) == 0);
  CHECK(run_cli("fit --model stvsar --input " + dir.file("grid.csv") +
                " --order 8 --sparsity 2 --out-prefix " + p_stv) == 0);

  const auto sar = parse_summary(p_sar + ".summary.txt");
  const auto stv = parse_summary(p_stv + ".summary.txt");
  CHECK(sar.at("omega") == stv.at("omega"));
  CHECK(stv.at("grid") == "1x1x1");
  CHECK(stv.at("cells_present") == "1");
  CHECK(stv.at("certified") == "yes");
  const double f_sar = std::stod(sar.at("objective"));
  const double f_stv = std::stod(stv.at("objective"));
  CHECK(std::abs(f_sar - f_stv) <= 1e-9 * std::max(1.0, f_sar));
}

TEST_CASE("stvsar writes a seasonality map on request") {
  TempDir dir("fit_season");
  SyntheticSpec spec;
  spec.length = 60;
  spec.lags = {{3, 0.8}};
  spec.noise = 0.05;
  spec.seed = 44;
  spec.grid_rows = 2;
  spec.grid_cols = 2;
  spec.grid_segments = 1;
  write_grid(dir.file("grid.csv"), gen_grid(spec));

  const std::string prefix = dir.file("fit");
  const int rc = run_cli("fit --model stvsar --input " + dir.file("grid.csv") +
                         " --order 6 --sparsity 1 --out-prefix " + prefix +
                         " --seasonality-lag 3");
  CHECK(rc == 0);
  const SeasonalityTable table =
      read_seasonality(prefix + ".seasonality.csv");
  CHECK(table.k == 3);
  CHECK(table.rows.size() == 4);
  for (const GridFitRow& row : table.rows) CHECK(row.w > 0.4);

  // Asking for an unfitted lag fails cleanly.
  const std::string log = dir.file("log.txt");
  CHECK(run_cli("fit --model stvsar --input " + dir.file("grid.csv") +
                    " --order 6 --sparsity 1 --out-prefix " + dir.file("f2") +
                    " --seasonality-lag 5",
                log) == 1);
  CHECK(read_text(log).find("not in the fitted support") != std::string::npos);
}

TEST_CASE("gen produces byte-identical reruns and a truth sidecar") {
  TempDir dir("gen_rerun");
  const std::string args = "gen --length 50 --lags 1:0.3,12:0.55 --noise 0.1"
                           " --seed 9 --out ";
  CHECK(run_cli(args + dir.file("a.csv")) == 0);
  CHECK(run_cli(args + dir.file("b.csv")) == 0);
  CHECK(read_text(dir.file("a.csv")) == read_text(dir.file("b.csv")));

  const TimeSeries x = read_univariate(dir.file("a.csv"));
  CHECK(x.values.size() == 50);
  CHECK(read_text(dir.file("a.csv.truth.json")).find("\"seed\": 9") !=
        std::string::npos);
}

TEST_CASE("gen grid output is loadable and deterministic") {
  TempDir dir("gen_grid");
  const std::string args =
      "gen --length 40 --lags 7:0.9 --noise 0.05 --seed 11 --grid 3x2x2"
      " --out ";
  CHECK(run_cli(args + dir.file("a.csv")) == 0);
  CHECK(run_cli(args + dir.file("b.csv")) == 0);
  CHECK(read_text(dir.file("a.csv")) == read_text(dir.file("b.csv")));

  const GridSeries g = read_grid(dir.file("a.csv"));
  CHECK(g.rows == 3);
  CHECK(g.cols == 2);
  CHECK(g.num_segments == 2);
  CHECK(g.seg_len == std::vector<int>{40, 40});

  CHECK(run_cli("gen --length 40 --lags 7:0.9 --grid 3x2 --out " +
                dir.file("c.csv")) == 1);  // malformed grid dims
  CHECK(run_cli("gen --length 40 --lags 7:bad --out " + dir.file("d.csv")) ==
        1);
}

TEST_CASE("fit reruns are byte-identical up to timings") {
  TempDir dir("fit_rerun");
  SyntheticSpec spec;
  spec.length = 120;
  spec.lags = {{2, 0.35}, {9, 0.5}};
  spec.noise = 0.1;
  spec.seed = 17;
  write_univariate(dir.file("x.csv"), gen_univariate(spec));

  const std::string base = "fit --model sar --input " + dir.file("x.csv") +
                           " --order 10 --sparsity 2 --solver mio-dvp"
                           " --tau0 4 --out-prefix ";
  CHECK(run_cli(base + dir.file("a")) == 0);
  CHECK(run_cli(base + dir.file("b")) == 0);
  CHECK(read_text(dir.file("a.coefficients.csv")) ==
        read_text(dir.file("b.coefficients.csv")));
  CHECK(strip_timings(read_text(dir.file("a.summary.txt"))) ==
        strip_timings(read_text(dir.file("b.summary.txt"))));
}

TEST_CASE("bench compares the three solvers over a corpus") {
  TempDir dir("bench");
  fs::create_directories(dir.file("corpus"));
  SyntheticSpec spec;
  spec.length = 80;
  spec.noise = 0.15;
  spec.lags = {{3, 0.6}};
  spec.seed = 1;
  write_univariate(dir.file("corpus/a.csv"), gen_univariate(spec));
  spec.lags = {{2, 0.3}, {5, 0.45}};
  spec.seed = 2;
  write_univariate(dir.file("corpus/b.csv"), gen_univariate(spec));

  const int rc = run_cli("bench --corpus " + dir.file("corpus") +
                         " --orders 6 --sparsities 1 2 --tau0 3 --out " +
                         dir.file("bench.csv"));
  CHECK(rc == 0);

  const std::vector<BenchRow> rows = read_bench(dir.file("bench.csv"));
  CHECK(rows.size() == 2 * 2 * 3);  // datasets x sparsities x solvers

  // Group by (dataset, order, tau) and check the accuracy ordering.
  std::map<std::string, std::map<std::string, double>> by_case;
  for (const BenchRow& r : rows) {
    by_case[r.dataset + "/" + std::to_string(r.order) + "/" +
            std::to_string(r.tau)][r.solver] = r.objective;
    CHECK(r.wall_time_s >= 0.0);
    if (r.solver == "mio") CHECK(r.certified);
    if (r.solver == "nnsp") CHECK(!r.certified);
  }
  for (const auto& [key, fs_map] : by_case) {
    REQUIRE(fs_map.size() == 3);
    const double f_mio = fs_map.at("mio");
    const double f_dvp = fs_map.at("mio-dvp");
    const double f_nnsp = fs_map.at("nnsp");
    CHECK(f_mio <= f_dvp + 2e-8);
    CHECK(f_dvp <= f_nnsp + 2e-8);
  }
}

}  // TEST_SUITE
