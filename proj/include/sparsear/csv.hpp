#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "sparsear/models.hpp"
#include "sparsear/series.hpp"

namespace sparsear {

/// Shortest decimal form that round-trips a 64-bit float (17 significant
/// digits). Every writer below uses it.
std::string format_double(double v);

/// Reads one numeric column. Empty selector = first column. A named
/// selector requires a header row; otherwise a leading non-numeric cell in
/// the selected position is treated as a header and skipped. A selector
/// that names no header column but parses as an integer is a 1-based column
/// index. NaN/Inf/blank cells are rejected with their 1-based row number.
TimeSeries read_univariate(const std::string& path,
                           const std::string& column = "");

/// Long-format grid reader, header `m,n,gamma,t,value`, all indices
/// 1-based. Every cell that appears must cover t = 1..T_gamma completely,
/// where T_gamma is the largest t seen for that segment; duplicates and
/// ragged cells are rejected naming the offending cell. Lines starting
/// with '#' are skipped.
GridSeries read_grid(const std::string& path);

/// Single column `value`, one row per observation.
void write_univariate(const std::string& path, const TimeSeries& x);

/// Inverse of read_grid: `m,n,gamma,t,value` rows for unmasked cells, in
/// (m, n, gamma, t) order. Round-trips bit-exactly.
void write_grid(const std::string& path, const GridSeries& g);

/// Coefficient table `gamma,k,w`, nonzero entries only, preceded by a
/// `# omega=...` comment. Lags are written 1-based; gamma starts at 1.
/// Covers both single fits (one row block) and segment-varying fits.
void write_segment_fit(const std::string& path,
                       std::span<const int> support, const Eigen::MatrixXd& W);

/// Grid coefficient table `m,n,gamma,k,w`: one row per unmasked cell and
/// supported lag (zero weights included, so absence always means masked).
void write_grid_fit(const std::string& path, const StvSarResult& res);

/// Map table `m,n,gamma,value` with the lag recorded in a `# k=...`
/// comment. Masked cells are omitted.
void write_seasonality(const std::string& path, const SeasonalityMap& map);

struct BenchRow {
  std::string dataset;
  int order = 0;
  int tau = 0;
  std::string solver;
  double objective = 0.0;
  double wall_time_s = 0.0;
  bool certified = false;
};

/// Table `dataset,order,tau,solver,objective,wall_time_s,certified`.
void write_bench(const std::string& path, std::span<const BenchRow> rows);

// Readers for the emitted tables, used by round-trip checks and the bench
// comparison harness.

struct SegmentFitRow {
  int gamma = 0;  // 1-based
  int k = 0;      // 1-based
  double w = 0.0;
};
struct SegmentFitTable {
  std::vector<int> omega;  // 1-based, from the comment header
  std::vector<SegmentFitRow> rows;
};
SegmentFitTable read_segment_fit(const std::string& path);

struct GridFitRow {
  int m = 0;
  int n = 0;
  int gamma = 0;
  int k = 0;
  double w = 0.0;
};
std::vector<GridFitRow> read_grid_fit(const std::string& path);

struct SeasonalityTable {
  int k = 0;  // 1-based, from the comment header
  std::vector<GridFitRow> rows;  // k field unused, w carries the value
};
SeasonalityTable read_seasonality(const std::string& path);

std::vector<BenchRow> read_bench(const std::string& path);

}  // namespace sparsear
