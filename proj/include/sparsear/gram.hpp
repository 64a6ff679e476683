#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sparsear/design.hpp"

namespace sparsear {

/// Sufficient statistics of a least-squares objective:
///   f(w) = w' P w - 2 w' q + constant.
/// P is symmetric PSD by construction; `constant` carries the target norm so
/// objectives stay comparable to direct residual sums.
struct GramSystem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double constant = 0.0;

  int order() const { return static_cast<int>(P.rows()); }
};

/// P = A'A, q = A'target, constant = target'target. P comes out exactly
/// symmetric (rank-update of the lower triangle, mirrored).
GramSystem gram_from_design(const DesignPair& dp);

/// Componentwise sum of systems sharing one order. Rejects mixed orders.
GramSystem gram_aggregate(std::span<const GramSystem> systems);

/// f(w) for a full-length coefficient vector.
double gram_objective(const GramSystem& gs, const Eigen::VectorXd& w);

/// Gram system of the design restricted to the given lag positions, built
/// straight from the series without forming A. indices are 0-based lag
/// positions, ascending. Row i of the restricted design is
/// (x[d+i-k-1])_{k in indices}; the target is x[d+i].
GramSystem restricted_gram_from_series(const std::vector<double>& x, int order,
                                       std::span<const int> indices);

}  // namespace sparsear
