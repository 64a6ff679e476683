#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sparsear {

// Lag indexing convention: lag k (a positive time offset, 1..d) is stored at
// vector position k-1 throughout the library. File writers, CLI summaries and
// error messages convert back to 1-based lags; nothing else does.

/// Univariate series of finite real observations.
struct TimeSeries {
  std::vector<double> values;

  std::size_t length() const { return values.size(); }
};

/// Validates length >= 1 and all entries finite. Throws std::invalid_argument.
void validate_series(const TimeSeries& x, const std::string& what = "series");

/// Ordered, non-overlapping segments of one parent series.
struct SegmentedSeries {
  std::vector<TimeSeries> segments;

  std::size_t count() const { return segments.size(); }
};

struct SegmentResult {
  SegmentedSeries series;
  std::size_t dropped = 0;  // trailing points that did not fill a segment
};

/// Splits x into floor(T/L) contiguous segments of length L, dropping the
/// remainder. Throws if no full segment fits.
SegmentResult segment(const TimeSeries& x, std::size_t seg_len);

/// Series arranged over an M x N spatial grid with G time segments per cell.
/// Cells absent from the input stay masked (present = 0) and are skipped by
/// every fitting routine. seg_len[g] is shared by all cells of segment g.
struct GridSeries {
  int rows = 0;
  int cols = 0;
  int num_segments = 0;
  std::vector<int> seg_len;             // per segment g
  std::vector<std::vector<double>> cells;  // flat_index -> series
  std::vector<std::uint8_t> present;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(rows) * cols * num_segments;
  }
  std::size_t flat(int m, int n, int g) const {
    return (static_cast<std::size_t>(m) * cols + n) * num_segments + g;
  }
};

}  // namespace sparsear
