#include "sparsear/batch.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparsear/bvls.hpp"
#include "sparsear/design.hpp"

namespace sparsear {

namespace {

constexpr std::size_t kChunk = 64;  // cells per reduction chunk

int resolve_threads(int threads) {
  return threads > 0 ? threads : omp_get_max_threads();
}

void validate_grid(const GridSeries& g, int order) {
  if (g.rows < 1 || g.cols < 1 || g.num_segments < 1) {
    throw std::invalid_argument("grid: empty dimensions");
  }
  if (g.cells.size() != g.cell_count() || g.present.size() != g.cell_count()) {
    throw std::invalid_argument("grid: cell storage does not match dims");
  }
  bool any = false;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (!g.present[c]) continue;
    any = true;
    if (static_cast<long>(g.cells[c].size()) <= order) {
      throw std::invalid_argument(
          "grid: cell " + std::to_string(c) + " has length " +
          std::to_string(g.cells[c].size()) + ", needs more than order " +
          std::to_string(order));
    }
  }
  if (!any) {
    throw std::invalid_argument("grid: no unmasked cells");
  }
}

GramSystem cell_gram(const std::vector<double>& values, int order) {
  TimeSeries x;
  x.values = values;
  return gram_from_design(build_design(x, order));
}

}  // namespace

GramSystem aggregate_grid_grams(const GridSeries& g, int order, int threads) {
  validate_grid(g, order);
  const std::size_t cells = g.cell_count();
  const std::size_t chunks = (cells + kChunk - 1) / kChunk;

  std::vector<GramSystem> partial(chunks);
  std::vector<char> nonempty(chunks, 0);

#pragma omp parallel for schedule(dynamic) \
    num_threads(resolve_threads(threads))
  for (long long ci = 0; ci < static_cast<long long>(chunks); ++ci) {
    const std::size_t begin = static_cast<std::size_t>(ci) * kChunk;
    const std::size_t end = std::min(begin + kChunk, cells);
    GramSystem acc;
    bool have = false;
    for (std::size_t c = begin; c < end; ++c) {
      if (!g.present[c]) continue;
      GramSystem gs = cell_gram(g.cells[c], order);
      if (!have) {
        acc = std::move(gs);
        have = true;
      } else {
        acc.P += gs.P;
        acc.q += gs.q;
        acc.constant += gs.constant;
      }
    }
    if (have) {
      partial[ci] = std::move(acc);
      nonempty[ci] = 1;
    }
  }

  // Fold the chunk partials in index order: the result does not depend on
  // the thread count or schedule.
  GramSystem out;
  bool have = false;
  for (std::size_t ci = 0; ci < chunks; ++ci) {
    if (!nonempty[ci]) continue;
    if (!have) {
      out = std::move(partial[ci]);
      have = true;
    } else {
      out.P += partial[ci].P;
      out.q += partial[ci].q;
      out.constant += partial[ci].constant;
    }
  }
  return out;
}

GramSystem aggregate_grid_grams_serial(const GridSeries& g, int order) {
  validate_grid(g, order);
  GramSystem out;
  bool have = false;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (!g.present[c]) continue;
    GramSystem gs = cell_gram(g.cells[c], order);
    if (!have) {
      out = std::move(gs);
      have = true;
    } else {
      out.P += gs.P;
      out.q += gs.q;
      out.constant += gs.constant;
    }
  }
  return out;
}

namespace {

// Shared cell body for the stage-2 kernels: weights/objectives land in
// preallocated per-cell slots, so any schedule gives identical results.
void stage2_cell(const GridSeries& g, std::size_t c, int order,
                 std::span<const int> support, double big_m, double kkt_tol,
                 Stage2Result& out, double& worst_kkt, long& uncert) {
  const std::vector<double>& x = g.cells[c];
  const GramSystem gs = restricted_gram_from_series(x, order, support);
  const bool constant =
      std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  if (constant) {
    out.weights[c] = Eigen::VectorXd::Zero(support.size());
    out.objectives[c] = gs.constant;
    out.flagged_constant[c] = 1;
    return;
  }
  BvlsOptions bopts;
  bopts.kkt_tol = kkt_tol;
  bopts.upper = big_m;
  const BoundedSupportSolution sol = bvls_nonneg(gs, bopts);
  out.weights[c] = sol.w;
  out.objectives[c] = sol.objective;
  worst_kkt = std::max(worst_kkt, sol.kkt_residual);
  if (!sol.certified) ++uncert;
}

Stage2Result stage2_run(const GridSeries& g, int order,
                        std::span<const int> support, double big_m,
                        double kkt_tol, int threads, bool parallel) {
  validate_grid(g, order);
  for (int k : support) {
    if (k < 0 || k >= order) {
      throw std::invalid_argument("stage2: support position out of range");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t cells = g.cell_count();
  Stage2Result out;
  out.weights.resize(cells);
  out.objectives.assign(cells, std::numeric_limits<double>::quiet_NaN());
  out.flagged_constant.assign(cells, 0);

  double worst_kkt = 0.0;
  long uncert = 0;
  if (parallel) {
#pragma omp parallel num_threads(resolve_threads(threads))
    {
      double local_kkt = 0.0;
      long local_uncert = 0;
#pragma omp for schedule(dynamic, 256)
      for (long long c = 0; c < static_cast<long long>(cells); ++c) {
        if (!g.present[c]) continue;
        stage2_cell(g, static_cast<std::size_t>(c), order, support, big_m,
                    kkt_tol, out, local_kkt, local_uncert);
      }
#pragma omp critical
      {
        worst_kkt = std::max(worst_kkt, local_kkt);
        uncert += local_uncert;
      }
    }
  } else {
    for (std::size_t c = 0; c < cells; ++c) {
      if (!g.present[c]) continue;
      stage2_cell(g, c, order, support, big_m, kkt_tol, out, worst_kkt,
                  uncert);
    }
  }

  out.max_kkt_residual = worst_kkt;
  out.uncertified = uncert;
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace

Stage2Result stage2_fit_grid(const GridSeries& g, int order,
                             std::span<const int> support, double big_m,
                             double kkt_tol, int threads) {
  return stage2_run(g, order, support, big_m, kkt_tol, threads, true);
}

Stage2Result stage2_fit_grid_serial(const GridSeries& g, int order,
                                    std::span<const int> support,
                                    double big_m, double kkt_tol) {
  return stage2_run(g, order, support, big_m, kkt_tol, 1, false);
}

}  // namespace sparsear
