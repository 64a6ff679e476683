#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sparsear/batch.hpp"
#include "sparsear/bnb.hpp"
#include "sparsear/config.hpp"
#include "sparsear/series.hpp"

namespace sparsear {

/// Segment-varying fit with one shared support. Row gamma of W is that
/// segment's full-length coefficient vector; supp(row) is contained in
/// `support` and |support| <= sparsity.
struct TvSarResult {
  std::vector<int> support;  // 0-based, ascending
  Eigen::MatrixXd W;         // num_segments x order
  std::vector<double> segment_objectives;
  double objective = 0.0;
  SolveStats stats;
  bool bigm_flagged = false;
};

/// Grid-wide fit: one global support, per-cell coefficients stored only for
/// the supported lags. cell_weights is indexed by GridSeries::flat and each
/// entry is aligned with `support`; masked cells have empty entries.
struct StvSarResult {
  std::vector<int> support;  // 0-based, ascending
  int rows = 0;
  int cols = 0;
  int num_segments = 0;
  std::vector<Eigen::VectorXd> cell_weights;
  std::vector<double> cell_objectives;
  std::vector<std::uint8_t> present;
  std::vector<std::uint8_t> flagged_constant;
  double objective = 0.0;  // sum over unmasked cells
  SolveStats stage1_stats;
  double stage2_max_kkt = 0.0;
  long stage2_uncertified = 0;
  double stage2_wall_time_s = 0.0;
};

/// Per-cell strength of one lag: values[flat(m,n,gamma)] = w_{m,n,gamma,k},
/// NaN where the grid is masked.
struct SeasonalityMap {
  int rows = 0;
  int cols = 0;
  int num_segments = 0;
  int lag = 0;  // 0-based position the map was extracted at
  std::vector<double> values;
  std::vector<std::uint8_t> present;
};

/// Single-series fit dispatched on cfg.solver: nnsp gives a greedy
/// (uncertified) fit, mio an exact certified one, mio-dvp an exact fit on
/// the pruned candidate set (heuristic for the full problem).
SparseFit fit_sar(const TimeSeries& x, const ModelConfig& cfg);

/// Shared-support fit across segments; solver must be mio or mio-dvp
/// (greedy alone cannot certify a shared support).
TvSarResult fit_tvsar(const SegmentedSeries& ss, const ModelConfig& cfg);

/// Two-stage grid fit: stage 1 solves the aggregate Gram system exactly for
/// the global support, stage 2 refits every unmasked cell on it. For
/// mio-dvp the candidate screen runs on the aggregate system.
StvSarResult fit_stvsar(const GridSeries& g, const ModelConfig& cfg);

/// Extracts the coefficient map at one supported lag (0-based position).
/// Rejects lags outside the support, listing the available ones (1-based).
SeasonalityMap seasonality_map(const StvSarResult& res, int lag);

}  // namespace sparsear
