#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "sparsear/bvls.hpp"
#include "sparsear/gram.hpp"
#include "sparsear/nnsp.hpp"

namespace sparsear {

/// Search diagnostics for one exact solve. `certified` means the search
/// closed the gap below gap_tol with every node bound KKT-certified;
/// `uncertified_bvls` counts relaxation solves that missed the KKT tolerance
/// (those nodes fall back to the trivial bound 0 rather than pruning).
struct SolveStats {
  long nodes_explored = 0;
  double incumbent_objective = std::numeric_limits<double>::infinity();
  double best_bound = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  double wall_time_s = 0.0;
  bool certified = false;
  double max_kkt_residual = 0.0;
  long uncertified_bvls = 0;
};

/// Exact solve outcome. `weights` holds one full-length coefficient vector
/// per segment (a single entry for plain autoregressions); `support` is the
/// shared 0-based support, ascending. `bigm_flagged` marks any coefficient
/// within 1e-6 of the box bound, a sign the bound is binding and the
/// reported optimum may be an artifact of it.
struct SparseFit {
  std::vector<Eigen::VectorXd> weights;
  std::vector<int> support;
  double objective = 0.0;
  SolveStats stats;
  bool bigm_flagged = false;
};

/// Read-only view of a branch-and-bound node, exposed for instrumentation.
struct BnbNodeView {
  const std::vector<int>& forced_in;   // positions pinned into the support
  const std::vector<int>& forced_out;  // positions pinned out
  double bound;                        // lower bound for the subtree
  bool leaf;
};

struct BnbOptions {
  int sparsity = 1;
  double big_m = 5.0;
  double gap_tol = 1e-8;
  long node_budget = 1000000;
  double kkt_tol = 1e-9;
  std::vector<int> allowed;  // empty = all lag positions
  bool seed_with_greedy = true;
  std::function<void(const BnbNodeView&)> on_node;  // test hook, may be empty
};

/// Position to branch on: the free position with the largest summed
/// relaxation coefficient, ties toward the smaller index. Exposed for tests.
int branch_select(std::span<const Eigen::VectorXd> relaxed,
                  std::span<const char> free_mask);

/// Exact cardinality-constrained non-negative fit on one Gram system:
///   min f(w)  s.t.  0 <= w <= big_m,  ||w||_0 <= sparsity.
/// Best-bound-first branch and bound over support inclusion; node bounds are
/// box-constrained relaxations, so every bound is a true lower bound.
SparseFit solve_sar(const GramSystem& gs, const BnbOptions& opts);

/// Shared-support variant: per-segment weight vectors with one support
/// common to all segments. Node bounds decompose into per-segment
/// relaxations; a relaxation whose support union already fits the
/// cardinality budget closes its subtree.
SparseFit solve_shared_support(std::span<const GramSystem> systems,
                               const BnbOptions& opts);

}  // namespace sparsear
