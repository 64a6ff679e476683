#include "sparsear/gram.hpp"

#include <stdexcept>
#include <string>

namespace sparsear {

// Both Gram builders accumulate row-by-row (i ascending) over lower-triangle
// pairs, so slicing a full system at `indices` and building the restricted
// system directly produce bitwise-identical entries. Solver paths rely on
// that agreement; do not swap in a blocked kernel here.

GramSystem gram_from_design(const DesignPair& dp) {
  const int d = static_cast<int>(dp.A.cols());
  const long rows = dp.A.rows();
  GramSystem gs;
  gs.P = Eigen::MatrixXd::Zero(d, d);
  gs.q = Eigen::VectorXd::Zero(d);
  gs.constant = 0.0;
  for (long i = 0; i < rows; ++i) {
    const double y = dp.target(i);
    gs.constant += y * y;
    for (int a = 0; a < d; ++a) {
      const double va = dp.A(i, a);
      gs.q(a) += va * y;
      for (int b = 0; b <= a; ++b) {
        gs.P(a, b) += va * dp.A(i, b);
      }
    }
  }
  gs.P.triangularView<Eigen::StrictlyUpper>() =
      gs.P.triangularView<Eigen::StrictlyLower>().transpose();
  return gs;
}

GramSystem gram_aggregate(std::span<const GramSystem> systems) {
  if (systems.empty()) {
    throw std::invalid_argument("gram_aggregate: empty system list");
  }
  GramSystem out = systems.front();
  for (std::size_t i = 1; i < systems.size(); ++i) {
    const GramSystem& gs = systems[i];
    if (gs.order() != out.order()) {
      throw std::invalid_argument(
          "gram_aggregate: mixed orders " + std::to_string(out.order()) +
          " and " + std::to_string(gs.order()));
    }
    out.P += gs.P;
    out.q += gs.q;
    out.constant += gs.constant;
  }
  return out;
}

double gram_objective(const GramSystem& gs, const Eigen::VectorXd& w) {
  if (w.size() != gs.P.rows()) {
    throw std::invalid_argument("gram_objective: coefficient length " +
                                std::to_string(w.size()) +
                                " does not match order " +
                                std::to_string(gs.P.rows()));
  }
  return w.dot(gs.P * w) - 2.0 * w.dot(gs.q) + gs.constant;
}

GramSystem restricted_gram_from_series(const std::vector<double>& x, int order,
                                       std::span<const int> indices) {
  const auto T = static_cast<long>(x.size());
  if (order < 1 || T <= order) {
    throw std::invalid_argument(
        "restricted_gram_from_series: series length " + std::to_string(T) +
        " must exceed order " + std::to_string(order));
  }
  const int s = static_cast<int>(indices.size());
  for (int a = 0; a < s; ++a) {
    if (indices[a] < 0 || indices[a] >= order) {
      throw std::invalid_argument(
          "restricted_gram_from_series: lag position out of range");
    }
  }
  const long rows = T - order;
  GramSystem gs;
  gs.P = Eigen::MatrixXd::Zero(s, s);
  gs.q = Eigen::VectorXd::Zero(s);
  gs.constant = 0.0;
  for (long i = 0; i < rows; ++i) {
    const double y = x[static_cast<std::size_t>(order + i)];
    gs.constant += y * y;
    for (int a = 0; a < s; ++a) {
      const double va = x[static_cast<std::size_t>(order + i - indices[a] - 1)];
      gs.q(a) += va * y;
      for (int b = 0; b <= a; ++b) {
        gs.P(a, b) +=
            va * x[static_cast<std::size_t>(order + i - indices[b] - 1)];
      }
    }
  }
  gs.P.triangularView<Eigen::StrictlyUpper>() =
      gs.P.triangularView<Eigen::StrictlyLower>().transpose();
  return gs;
}

}  // namespace sparsear
