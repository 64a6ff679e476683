#pragma once

#include <Eigen/Dense>

#include "sparsear/series.hpp"

namespace sparsear {

/// Lagged regression system: row i of A holds the reversed lag window
/// (x[d+i-1], ..., x[i]) and target[i] = x[d+i] (0-based storage).
struct DesignPair {
  Eigen::MatrixXd A;       // (T-d) x d
  Eigen::VectorXd target;  // T-d
  int order = 0;
};

/// Builds the design pair for AR order d. Requires T > d >= 1.
DesignPair build_design(const TimeSeries& x, int order);

/// Dense least-squares coefficients; minimum-norm solution when the normal
/// matrix is singular.
Eigen::VectorXd ols_fit(const DesignPair& dp);

/// Residual sum of squares ||target - A w||^2.
double objective(const DesignPair& dp, const Eigen::VectorXd& w);

}  // namespace sparsear
