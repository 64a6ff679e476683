#include "sparsear/series.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsear {

void validate_series(const TimeSeries& x, const std::string& what) {
  if (x.values.empty()) {
    throw std::invalid_argument(what + ": empty series");
  }
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    if (!std::isfinite(x.values[i])) {
      throw std::invalid_argument(what + ": non-finite value at position " +
                                  std::to_string(i + 1));
    }
  }
}

SegmentResult segment(const TimeSeries& x, std::size_t seg_len) {
  if (seg_len == 0) {
    throw std::invalid_argument("segment: segment length must be positive");
  }
  const std::size_t count = x.values.size() / seg_len;
  if (count == 0) {
    throw std::invalid_argument(
        "segment: series of length " + std::to_string(x.values.size()) +
        " holds no full segment of length " + std::to_string(seg_len));
  }
  SegmentResult out;
  out.series.segments.reserve(count);
  for (std::size_t g = 0; g < count; ++g) {
    TimeSeries seg;
    seg.values.assign(x.values.begin() + g * seg_len,
                      x.values.begin() + (g + 1) * seg_len);
    out.series.segments.push_back(std::move(seg));
  }
  out.dropped = x.values.size() - count * seg_len;
  return out;
}

}  // namespace sparsear
