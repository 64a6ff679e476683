#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sparsear/csv.hpp"
#include "sparsear/models.hpp"
#include "sparsear/synthetic.hpp"

namespace {

using namespace sparsear;

std::string lag_list(std::span<const int> support) {
  std::string s;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(support[i] + 1);
  }
  return s;
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }

struct FitArgs {
  std::string model;
  std::string input;
  std::string column;
  int order = 0;
  int sparsity = 0;
  std::string solver = "mio";
  int tau0 = 0;
  double bigm = 5.0;
  int segment_length = 0;
  std::string out_prefix;
  bool require_certified = false;
  int threads = 0;
  int seasonality_lag = 0;  // 1-based; 0 = off
};

ModelConfig to_config(const FitArgs& a) {
  ModelConfig cfg;
  cfg.order = a.order;
  cfg.sparsity = a.sparsity;
  cfg.big_m = a.bigm;
  cfg.tau0 = a.tau0;
  cfg.solver = solver_from_string(a.solver);
  cfg.threads = a.threads;
  return cfg;
}

void emit_summary(const std::string& text, const std::string& out_prefix) {
  std::cout << text;
  if (!out_prefix.empty()) {
    const std::string path = out_prefix + ".summary.txt";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
  }
}

std::string common_header(const FitArgs& a) {
  std::string s;
  s += "model: " + a.model + "\n";
  s += "solver: " + a.solver + "\n";
  s += "input: " + a.input + "\n";
  s += "order: " + std::to_string(a.order) + "\n";
  s += "sparsity: " + std::to_string(a.sparsity) + "\n";
  if (a.solver == "mio-dvp") s += "tau0: " + std::to_string(a.tau0) + "\n";
  s += "big_m: " + format_double(a.bigm) + "\n";
  return s;
}

std::string stats_block(const SolveStats& st) {
  std::string s;
  s += "objective: " + format_double(st.incumbent_objective) + "\n";
  s += "certified: " + yes_no(st.certified) + "\n";
  s += "gap: " + format_double(st.gap) + "\n";
  s += "best_bound: " + format_double(st.best_bound) + "\n";
  s += "nodes: " + std::to_string(st.nodes_explored) + "\n";
  s += "wall_time_s: " + format_double(st.wall_time_s) + "\n";
  return s;
}

int run_fit(const FitArgs& a) {
  const ModelConfig cfg = to_config(a);
  bool certified = false;

  if (a.model == "sar") {
    const TimeSeries x = read_univariate(a.input, a.column);
    const SparseFit fit = fit_sar(x, cfg);
    certified = fit.stats.certified;
    std::string s = common_header(a);
    s += "omega: " + lag_list(fit.support) + "\n";
    s += stats_block(fit.stats);
    s += "bigm_flagged: " + yes_no(fit.bigm_flagged) + "\n";
    emit_summary(s, a.out_prefix);
    if (!a.out_prefix.empty()) {
      Eigen::MatrixXd W(1, cfg.order);
      W.row(0) = fit.weights[0].transpose();
      write_segment_fit(a.out_prefix + ".coefficients.csv", fit.support, W);
    }
  } else if (a.model == "tvsar") {
    if (a.segment_length < 1) {
      throw std::invalid_argument("tvsar requires --segment-length");
    }
    const TimeSeries x = read_univariate(a.input, a.column);
    const SegmentResult sr = segment(x, a.segment_length);
    if (a.segment_length < 2 * a.order) {
      std::cerr << "warning: segment length " << a.segment_length
                << " is below twice the order " << a.order
                << "; per-segment fits are weakly determined\n";
    }
    const TvSarResult res = fit_tvsar(sr.series, cfg);
    certified = res.stats.certified;
    std::string s = common_header(a);
    s += "segments: " + std::to_string(sr.series.count()) + "\n";
    s += "dropped_points: " + std::to_string(sr.dropped) + "\n";
    s += "omega: " + lag_list(res.support) + "\n";
    s += stats_block(res.stats);
    s += "bigm_flagged: " + yes_no(res.bigm_flagged) + "\n";
    emit_summary(s, a.out_prefix);
    if (!a.out_prefix.empty()) {
      write_segment_fit(a.out_prefix + ".coefficients.csv", res.support,
                        res.W);
    }
  } else {  // stvsar
    const GridSeries g = read_grid(a.input);
    const StvSarResult res = fit_stvsar(g, cfg);
    certified = res.stage1_stats.certified && res.stage2_uncertified == 0;
    std::size_t present = 0, constant = 0;
    for (std::size_t c = 0; c < res.present.size(); ++c) {
      if (res.present[c]) ++present;
      if (res.flagged_constant[c]) ++constant;
    }
    std::string s = common_header(a);
    s += "grid: " + std::to_string(res.rows) + "x" +
         std::to_string(res.cols) + "x" + std::to_string(res.num_segments) +
         "\n";
    s += "cells_present: " + std::to_string(present) + "\n";
    s += "constant_cells: " + std::to_string(constant) + "\n";
    s += "omega: " + lag_list(res.support) + "\n";
    s += "objective: " + format_double(res.objective) + "\n";
    s += "certified: " + yes_no(certified) + "\n";
    s += "stage1_objective: " +
         format_double(res.stage1_stats.incumbent_objective) + "\n";
    s += "stage1_gap: " + format_double(res.stage1_stats.gap) + "\n";
    s += "stage1_nodes: " + std::to_string(res.stage1_stats.nodes_explored) +
         "\n";
    s += "stage1_wall_time_s: " + format_double(res.stage1_stats.wall_time_s) +
         "\n";
    s += "stage2_uncertified: " + std::to_string(res.stage2_uncertified) +
         "\n";
    s += "stage2_wall_time_s: " + format_double(res.stage2_wall_time_s) + "\n";
    emit_summary(s, a.out_prefix);
    if (!a.out_prefix.empty()) {
      write_grid_fit(a.out_prefix + ".coefficients.csv", res);
    }
    if (a.seasonality_lag > 0) {
      if (a.out_prefix.empty()) {
        throw std::invalid_argument("--seasonality-lag needs --out-prefix");
      }
      const SeasonalityMap map = seasonality_map(res, a.seasonality_lag - 1);
      write_seasonality(a.out_prefix + ".seasonality.csv", map);
    }
  }

  if (a.require_certified && !certified) {
    std::cerr << "error: solve is not certified and --require-certified is "
                 "set\n";
    return 2;
  }
  return 0;
}

SyntheticSpec parse_gen_spec(const std::string& lags, const std::string& grid,
                             int length, double noise, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.length = length;
  spec.noise = noise;
  spec.seed = seed;
  std::string rest = lags;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string tok = rest.substr(0, comma);
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    const auto colon = tok.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("bad --lags entry '" + tok +
                                  "' (expected k:coef)");
    }
    PlantedLag pl;
    try {
      pl.lag = std::stoi(tok.substr(0, colon));
      pl.coef = std::stod(tok.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad --lags entry '" + tok +
                                  "' (expected k:coef)");
    }
    spec.lags.push_back(pl);
  }
  if (spec.lags.empty()) {
    throw std::invalid_argument("--lags must plant at least one lag");
  }
  if (!grid.empty()) {
    int dims[3];
    std::string g = grid;
    for (int i = 0; i < 3; ++i) {
      const auto x = g.find('x');
      const std::string tok = i < 2 ? g.substr(0, x) : g;
      if ((i < 2 && x == std::string::npos) || tok.empty()) {
        throw std::invalid_argument("bad --grid '" + grid +
                                    "' (expected MxNxG)");
      }
      try {
        dims[i] = std::stoi(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad --grid '" + grid +
                                    "' (expected MxNxG)");
      }
      if (i < 2) g = g.substr(x + 1);
    }
    spec.grid_rows = dims[0];
    spec.grid_cols = dims[1];
    spec.grid_segments = dims[2];
  }
  return spec;
}

int run_gen(const SyntheticSpec& spec, const std::string& out) {
  if (spec.is_grid()) {
    write_grid(out, gen_grid(spec));
  } else {
    write_univariate(out, gen_univariate(spec));
  }
  write_ground_truth(out + ".truth.json", spec);
  std::cout << "wrote " << out << " and " << out << ".truth.json\n";
  return 0;
}

int run_bench(const std::string& corpus, const std::vector<int>& orders,
              const std::vector<int>& sparsities, int tau0, double bigm,
              const std::string& out) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::invalid_argument("no .csv files in corpus dir: " + corpus);
  }

  std::vector<BenchRow> rows;
  for (const fs::path& f : files) {
    const TimeSeries x = read_univariate(f.string());
    for (int order : orders) {
      if (static_cast<long>(x.length()) <= order) continue;
      for (int tau : sparsities) {
        if (tau < 1 || tau > order) continue;
        for (const char* solver : {"nnsp", "mio-dvp", "mio"}) {
          ModelConfig cfg;
          cfg.order = order;
          cfg.sparsity = tau;
          cfg.big_m = bigm;
          cfg.solver = solver_from_string(solver);
          if (cfg.solver == Solver::mio_dvp) {
            cfg.tau0 = std::min(order, std::max(tau + 1, tau0));
            if (cfg.tau0 <= tau) continue;  // no room to prune
          }
          const SparseFit fit = fit_sar(x, cfg);
          BenchRow row;
          row.dataset = f.filename().string();
          row.order = order;
          row.tau = tau;
          row.solver = solver;
          row.objective = fit.objective;
          row.wall_time_s = fit.stats.wall_time_s;
          row.certified = fit.stats.certified;
          rows.push_back(row);
        }
      }
    }
  }
  write_bench(out, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse non-negative autoregression fitting for periodicity "
               "analysis"};
  app.require_subcommand(1);

  FitArgs fa;
  CLI::App* fit = app.add_subcommand("fit", "Fit a model to a series file");
  fit->add_option("--model", fa.model, "Model: sar, tvsar, or stvsar")
      ->required()
      ->check(CLI::IsMember({"sar", "tvsar", "stvsar"}));
  fit->add_option("--input", fa.input, "Input CSV path")->required();
  fit->add_option("--column", fa.column,
                  "Column name or 1-based index (univariate input)");
  fit->add_option("--order", fa.order, "AR order d")->required();
  fit->add_option("--sparsity", fa.sparsity, "Support budget tau")->required();
  fit->add_option("--solver", fa.solver, "Solver: nnsp, mio, or mio-dvp")
      ->check(CLI::IsMember({"nnsp", "mio", "mio-dvp"}));
  fit->add_option("--tau0", fa.tau0, "Pruning sparsity (mio-dvp)");
  fit->add_option("--bigm", fa.bigm, "Coefficient upper bound")
      ->capture_default_str();
  fit->add_option("--segment-length", fa.segment_length,
                  "Segment length (tvsar)");
  fit->add_option("--out-prefix", fa.out_prefix,
                  "Prefix for output files (summary, coefficients)");
  fit->add_flag("--require-certified", fa.require_certified,
                "Exit with status 2 unless the solve is certified optimal");
  fit->add_option("--threads", fa.threads, "Worker threads (0 = all)")
      ->capture_default_str();
  fit->add_option("--seasonality-lag", fa.seasonality_lag,
                  "Also write the coefficient map at this lag (stvsar)");

  int gen_length = 0;
  std::string gen_lags, gen_grid_dims, gen_out;
  double gen_noise = 0.0;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic series");
  gen->add_option("--length", gen_length, "Points per series")->required();
  gen->add_option("--lags", gen_lags, "Planted lags, e.g. '1:0.3,12:0.6'")
      ->required();
  gen->add_option("--noise", gen_noise, "Innovation standard deviation")
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--grid", gen_grid_dims, "Grid dims MxNxG (grid output)");
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  std::string bench_corpus, bench_out;
  std::vector<int> bench_orders, bench_sparsities;
  int bench_tau0 = 10;
  double bench_bigm = 5.0;
  CLI::App* bench =
      app.add_subcommand("bench", "Compare solvers across a corpus");
  bench->add_option("--corpus", bench_corpus, "Directory of univariate CSVs")
      ->required();
  bench->add_option("--orders", bench_orders, "AR orders to run")->required();
  bench->add_option("--sparsities", bench_sparsities, "Sparsity levels")
      ->required();
  bench->add_option("--tau0", bench_tau0, "Pruning sparsity for mio-dvp")
      ->capture_default_str();
  bench->add_option("--bigm", bench_bigm, "Coefficient upper bound")
      ->capture_default_str();
  bench->add_option("--out", bench_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (*fit) return run_fit(fa);
    if (*gen) {
      return run_gen(
          parse_gen_spec(gen_lags, gen_grid_dims, gen_length, gen_noise,
                         gen_seed),
          gen_out);
    }
    return run_bench(bench_corpus, bench_orders, bench_sparsities, bench_tau0,
                     bench_bigm, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
