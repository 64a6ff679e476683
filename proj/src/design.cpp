#include "sparsear/design.hpp"

#include <stdexcept>
#include <string>

namespace sparsear {

DesignPair build_design(const TimeSeries& x, int order) {
  if (order < 1) {
    throw std::invalid_argument("build_design: order must be >= 1, got " +
                                std::to_string(order));
  }
  const auto T = static_cast<long>(x.length());
  if (T <= order) {
    throw std::invalid_argument(
        "build_design: series length " + std::to_string(T) +
        " must exceed order " + std::to_string(order));
  }
  const long rows = T - order;
  DesignPair dp;
  dp.order = order;
  dp.A.resize(rows, order);
  dp.target.resize(rows);
  for (long i = 0; i < rows; ++i) {
    // Row i is the reversed lag window ending just before x[order + i].
    for (int j = 0; j < order; ++j) {
      dp.A(i, j) = x.values[static_cast<std::size_t>(order + i - j - 1)];
    }
    dp.target(i) = x.values[static_cast<std::size_t>(order + i)];
  }
  return dp;
}

Eigen::VectorXd ols_fit(const DesignPair& dp) {
  // Minimum-norm least squares; exact on rank-deficient designs too.
  return dp.A.completeOrthogonalDecomposition().solve(dp.target);
}

double objective(const DesignPair& dp, const Eigen::VectorXd& w) {
  if (w.size() != dp.A.cols()) {
    throw std::invalid_argument("objective: coefficient length " +
                                std::to_string(w.size()) +
                                " does not match order " +
                                std::to_string(dp.A.cols()));
  }
  return (dp.target - dp.A * w).squaredNorm();
}

}  // namespace sparsear
