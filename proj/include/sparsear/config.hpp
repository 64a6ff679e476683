#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace sparsear {

enum class Solver { nnsp, mio, mio_dvp };

Solver solver_from_string(const std::string& name);
std::string to_string(Solver s);

/// Numerical controls shared by the solvers. Defaults are the tested values;
/// changing them voids the certification tolerances tied to them.
struct Tolerances {
  double kkt_tol = 1e-9;        // scaled by max(1, ||q||_inf)
  double gap_tol = 1e-8;        // absolute branch-and-bound gap
  double nnsp_tol_res = 1e-10;  // greedy stagnation threshold
  int nnsp_max_iter = 50;
  long node_budget = 1000000;
};

/// One fitting request. `tau0` only matters for Solver::mio_dvp.
struct ModelConfig {
  int order = 0;
  int sparsity = 0;
  double big_m = 5.0;
  int tau0 = 0;
  Solver solver = Solver::mio;
  Tolerances tol;
  int threads = 0;  // 0 = all hardware threads

  /// Throws std::invalid_argument on an inconsistent request:
  /// order >= 1, 1 <= sparsity <= order, big_m > 0, and for mio-dvp
  /// sparsity < tau0 <= order.
  void validate() const;
};

}  // namespace sparsear
