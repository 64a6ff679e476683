#include "sparsear/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sparsear/design.hpp"
#include "sparsear/nnsp.hpp"

namespace sparsear {

namespace {

BnbOptions bnb_options(const ModelConfig& cfg) {
  BnbOptions opts;
  opts.sparsity = cfg.sparsity;
  opts.big_m = cfg.big_m;
  opts.gap_tol = cfg.tol.gap_tol;
  opts.node_budget = cfg.tol.node_budget;
  opts.kkt_tol = cfg.tol.kkt_tol;
  return opts;
}

NnspOptions nnsp_options(const ModelConfig& cfg, int sparsity) {
  NnspOptions opts;
  opts.sparsity = sparsity;
  opts.tol_res = cfg.tol.nnsp_tol_res;
  opts.max_iter = cfg.tol.nnsp_max_iter;
  opts.upper = cfg.big_m;
  opts.kkt_tol = cfg.tol.kkt_tol;
  return opts;
}

std::string lag_list(std::span<const int> support) {
  std::string s;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(support[i] + 1);
  }
  return s;
}

}  // namespace

SparseFit fit_sar(const TimeSeries& x, const ModelConfig& cfg) {
  cfg.validate();
  validate_series(x);
  const GramSystem gs = gram_from_design(build_design(x, cfg.order));

  if (cfg.solver == Solver::nnsp) {
    const auto t0 = std::chrono::steady_clock::now();
    const GreedyFit g = nnsp(gs, nnsp_options(cfg, cfg.sparsity));
    SparseFit fit;
    fit.weights.push_back(g.w);
    fit.support = g.support;
    fit.objective = g.objective;
    fit.stats.incumbent_objective = g.objective;
    fit.stats.best_bound = 0.0;
    fit.stats.gap = g.objective;
    fit.stats.certified = false;  // greedy carries no optimality certificate
    fit.stats.max_kkt_residual = g.max_kkt_residual;
    fit.stats.uncertified_bvls = g.uncertified_refits;
    fit.stats.wall_time_s = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
    const double edge = 1e-6;
    for (int k = 0; k < g.w.size(); ++k) {
      if (g.w(k) != 0.0 && std::abs(g.w(k) - cfg.big_m) <= edge) {
        fit.bigm_flagged = true;
      }
    }
    return fit;
  }

  BnbOptions opts = bnb_options(cfg);
  if (cfg.solver == Solver::mio_dvp) {
    opts.allowed = dvp_candidates(std::span<const GramSystem>(&gs, 1),
                                  cfg.tau0, nnsp_options(cfg, cfg.tau0));
  }
  return solve_sar(gs, opts);
}

TvSarResult fit_tvsar(const SegmentedSeries& ss, const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.solver == Solver::nnsp) {
    throw std::invalid_argument(
        "tvsar requires an exact solver (mio or mio-dvp); nnsp cannot "
        "certify a shared support");
  }
  if (ss.segments.empty()) {
    throw std::invalid_argument("tvsar: no segments");
  }
  std::vector<GramSystem> grams;
  grams.reserve(ss.segments.size());
  for (std::size_t g = 0; g < ss.segments.size(); ++g) {
    validate_series(ss.segments[g], "segment " + std::to_string(g + 1));
    if (static_cast<long>(ss.segments[g].length()) <= cfg.order) {
      throw std::invalid_argument(
          "tvsar: segment " + std::to_string(g + 1) + " has length " +
          std::to_string(ss.segments[g].length()) +
          ", needs more than order " + std::to_string(cfg.order));
    }
    grams.push_back(gram_from_design(build_design(ss.segments[g], cfg.order)));
  }

  BnbOptions opts = bnb_options(cfg);
  if (cfg.solver == Solver::mio_dvp) {
    opts.allowed = dvp_candidates(std::span<const GramSystem>(grams), cfg.tau0,
                                  nnsp_options(cfg, cfg.tau0));
  }
  const SparseFit fit =
      solve_shared_support(std::span<const GramSystem>(grams), opts);

  TvSarResult res;
  res.support = fit.support;
  res.W.resize(static_cast<long>(grams.size()), cfg.order);
  res.segment_objectives.resize(grams.size());
  for (std::size_t g = 0; g < grams.size(); ++g) {
    res.W.row(static_cast<long>(g)) = fit.weights[g].transpose();
    res.segment_objectives[g] = gram_objective(grams[g], fit.weights[g]);
  }
  res.objective = fit.objective;
  res.stats = fit.stats;
  res.bigm_flagged = fit.bigm_flagged;
  return res;
}

StvSarResult fit_stvsar(const GridSeries& g, const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.solver == Solver::nnsp) {
    throw std::invalid_argument(
        "stvsar requires an exact solver (mio or mio-dvp) for its global "
        "stage");
  }
  const GramSystem agg = aggregate_grid_grams(g, cfg.order, cfg.threads);

  BnbOptions opts = bnb_options(cfg);
  if (cfg.solver == Solver::mio_dvp) {
    opts.allowed = dvp_candidates(std::span<const GramSystem>(&agg, 1),
                                  cfg.tau0, nnsp_options(cfg, cfg.tau0));
  }
  const SparseFit stage1 = solve_sar(agg, opts);

  const Stage2Result stage2 =
      stage2_fit_grid(g, cfg.order, stage1.support, cfg.big_m,
                      cfg.tol.kkt_tol, cfg.threads);

  StvSarResult res;
  res.support = stage1.support;
  res.rows = g.rows;
  res.cols = g.cols;
  res.num_segments = g.num_segments;
  res.cell_weights = stage2.weights;
  res.cell_objectives = stage2.objectives;
  res.present.assign(g.present.begin(), g.present.end());
  res.flagged_constant = stage2.flagged_constant;
  res.stage1_stats = stage1.stats;
  res.stage2_max_kkt = stage2.max_kkt_residual;
  res.stage2_uncertified = stage2.uncertified;
  res.stage2_wall_time_s = stage2.wall_time_s;
  double total = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (g.present[c]) total += res.cell_objectives[c];
  }
  res.objective = total;
  return res;
}

SeasonalityMap seasonality_map(const StvSarResult& res, int lag) {
  const auto it =
      std::find(res.support.begin(), res.support.end(), lag);
  if (it == res.support.end()) {
    throw std::invalid_argument(
        "seasonality lag " + std::to_string(lag + 1) +
        " is not in the fitted support {" + lag_list(res.support) + "}");
  }
  const auto pos = static_cast<int>(it - res.support.begin());

  SeasonalityMap map;
  map.rows = res.rows;
  map.cols = res.cols;
  map.num_segments = res.num_segments;
  map.lag = lag;
  const std::size_t cells = res.cell_weights.size();
  map.values.assign(cells, std::numeric_limits<double>::quiet_NaN());
  map.present = res.present;
  for (std::size_t c = 0; c < cells; ++c) {
    if (res.present[c]) map.values[c] = res.cell_weights[c](pos);
  }
  return map;
}

}  // namespace sparsear
