#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsear/gram.hpp"
#include "sparsear/series.hpp"

namespace sparsear {

/// Stage-1 aggregate: the componentwise sum of every unmasked cell's Gram
/// system at the given order. Cells are reduced in fixed-size chunks and the
/// chunk partials folded in index order, so the result is bit-identical for
/// any thread count. threads = 0 means all hardware threads.
GramSystem aggregate_grid_grams(const GridSeries& g, int order, int threads);

/// Single-threaded reference with the same chunking, kept for testing.
GramSystem aggregate_grid_grams_serial(const GridSeries& g, int order);

/// Output of the per-cell restricted refit pass. weights[c] is aligned with
/// the support passed in (length |support|) and empty for masked cells;
/// objectives[c] is NaN for masked cells. Constant cells (zero-variance
/// series) get w = 0 and a flag instead of an error.
struct Stage2Result {
  std::vector<Eigen::VectorXd> weights;
  std::vector<double> objectives;
  std::vector<std::uint8_t> flagged_constant;
  double max_kkt_residual = 0.0;
  long uncertified = 0;
  double wall_time_s = 0.0;
};

/// Independent box-constrained refit of every unmasked cell on the fixed
/// support (0-based lag positions, ascending). Cells write to disjoint
/// preallocated slots, so the result is bit-identical for any schedule.
Stage2Result stage2_fit_grid(const GridSeries& g, int order,
                             std::span<const int> support, double big_m,
                             double kkt_tol, int threads);

/// Single-threaded reference, kept for testing.
Stage2Result stage2_fit_grid_serial(const GridSeries& g, int order,
                                    std::span<const int> support,
                                    double big_m, double kkt_tol);

}  // namespace sparsear
