#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

#include "sparsear/bvls.hpp"
#include "sparsear/gram.hpp"

namespace sparsear {

struct NnspOptions {
  int sparsity = 1;
  double tol_res = 1e-10;
  int max_iter = 50;
  double upper = std::numeric_limits<double>::infinity();
  double kkt_tol = 1e-9;
  std::vector<int> allowed;  // empty = all lag positions
};

/// Greedy fit outcome. `support` is the kept index set S (size
/// min(sparsity, d), may include zero coefficients), ascending.
/// The returned iterate is the best one seen, not necessarily the last.
struct GreedyFit {
  Eigen::VectorXd w;
  std::vector<int> support;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  double max_kkt_residual = 0.0;  // worst refit residual seen
  long uncertified_refits = 0;
};

/// Non-negative subspace pursuit on a Gram system. Per iteration: rank the
/// correlations q - Pw, merge the top-s positions into the current set,
/// box-refit, keep the s largest refit entries (zeros included, ties to the
/// smaller index), refit again on the kept set. Stops when the kept set
/// repeats or the objective improves by less than tol_res.
GreedyFit nnsp(const GramSystem& gs, const NnspOptions& opts);

GreedyFit nnsp(const DesignPair& dp, const NnspOptions& opts);

/// Variable-pruning screen: run nnsp with sparsity tau0 on each segment's
/// Gram system, return the ascending union of the kept sets.
std::vector<int> dvp_candidates(std::span<const GramSystem> systems,
                                int tau0, const NnspOptions& base);

std::vector<int> dvp_candidates(std::span<const DesignPair> segments,
                                int tau0, const NnspOptions& base);

}  // namespace sparsear
