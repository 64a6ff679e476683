#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

#include "sparsear/gram.hpp"

namespace sparsear {

struct BvlsOptions {
  double kkt_tol = 1e-9;  // scaled by max(1, ||q||_inf)
  int max_iter_factor = 10;  // iteration cap = factor * (# allowed variables)
  double upper = std::numeric_limits<double>::infinity();
};

/// Result of a box-constrained least-squares solve on a Gram system.
/// `support` lists the 0-based positions with w > 0, ascending.
/// `certified` means the KKT residual passed the scaled tolerance.
struct BoundedSupportSolution {
  Eigen::VectorXd w;           // full-length, zeros off the allowed set
  std::vector<int> support;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool certified = false;
  int active_set_changes = 0;
};

/// Minimizes f(w) = w'Pw - 2 w'q + c subject to 0 <= w_i <= upper for
/// i in `allowed` and w_i = 0 elsewhere. Active-set method on the compressed
/// subsystem; ties in the entering-variable choice break toward the smallest
/// lag index. The KKT check uses the full gradient g = 2(Pw - q):
///   interior: |g_i| small;  at 0: g_i >= -tol;  at upper: g_i <= tol.
BoundedSupportSolution bvls_nonneg(const GramSystem& gs,
                                   std::span<const int> allowed,
                                   const BvlsOptions& opts = {});

/// Convenience: solve with every variable allowed.
BoundedSupportSolution bvls_nonneg(const GramSystem& gs,
                                   const BvlsOptions& opts = {});

/// Least squares restricted to exactly the given support (no cap besides the
/// box). Used for refits after a support has been chosen.
BoundedSupportSolution restricted_fit(const GramSystem& gs,
                                      std::span<const int> support,
                                      const BvlsOptions& opts = {});

}  // namespace sparsear
