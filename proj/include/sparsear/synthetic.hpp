#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsear/series.hpp"

namespace sparsear {

/// One planted autoregressive term: x_t depends on x_{t-lag} with the given
/// nonnegative coefficient. Lags here are 1-based time offsets.
struct PlantedLag {
  int lag = 0;
  double coef = 0.0;
};

/// Rectangular patch of grid cells whose planted coefficients replace the
/// base set. Half-open 0-based row/col ranges.
struct RegionOverride {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;
  std::vector<PlantedLag> lags;
};

/// Seeded AR simulation request. The seed fully determines the output; grid
/// cells draw from per-cell substreams so the grid shape does not reshuffle
/// the noise. Stationarity guard: coefficient sum < 1 when noise > 0,
/// <= 1 when noise = 0 (an exact unit-root cycle is a valid noiseless case).
struct SyntheticSpec {
  int length = 0;  // points kept per series, after burn-in
  std::vector<PlantedLag> lags;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int grid_rows = 0;  // grid dims all zero = univariate
  int grid_cols = 0;
  int grid_segments = 0;
  std::vector<RegionOverride> regions;

  bool is_grid() const { return grid_rows > 0; }

  /// Throws std::invalid_argument on invalid lags/length or an unstable
  /// coefficient set (base or any region override).
  void validate() const;
};

/// Simulates x_t = sum_k coef_k x_{t-k} + eps_t, eps ~ N(0, noise^2), from
/// positive uniform starting values, discarding a burn-in of 10 * max lag.
TimeSeries gen_univariate(const SyntheticSpec& spec);

/// Grid variant: every (m, n, g) cell is an independent simulation of
/// `length` points; region overrides pick the cell's coefficient set
/// (later overrides win on overlap).
GridSeries gen_grid(const SyntheticSpec& spec);

/// Ground-truth sidecar (JSON): planted lags and coefficients, noise, seed,
/// and per-region overrides, for harnesses that score recovery.
void write_ground_truth(const std::string& path, const SyntheticSpec& spec);

}  // namespace sparsear
