#include "sparsear/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace sparsear {

namespace {

struct Node {
  std::vector<int> forced_in;
  std::vector<int> forced_out;
  double bound = 0.0;
  int branch_idx = -1;
  long seq = 0;  // insertion counter; makes the pop order total
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.seq > b.seq;
  }
};

std::vector<int> sorted_difference(const std::vector<int>& base,
                                   const std::vector<int>& minus) {
  std::vector<int> out;
  std::set_difference(base.begin(), base.end(), minus.begin(), minus.end(),
                      std::back_inserter(out));
  return out;
}

}  // namespace

int branch_select(std::span<const Eigen::VectorXd> relaxed,
                  std::span<const char> free_mask) {
  const int d = static_cast<int>(free_mask.size());
  int pick = -1;
  double best = -1.0;  // any free index beats this, so all-zero picks first
  for (int k = 0; k < d; ++k) {
    if (!free_mask[k]) continue;
    double total = 0.0;
    for (const Eigen::VectorXd& w : relaxed) total += w(k);
    if (total > best) {
      best = total;
      pick = k;
    }
  }
  return pick;
}

SparseFit solve_shared_support(std::span<const GramSystem> systems,
                               const BnbOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  if (systems.empty()) {
    throw std::invalid_argument("solve_shared_support: empty system list");
  }
  const int d = systems.front().order();
  for (const GramSystem& gs : systems) {
    if (gs.order() != d) {
      throw std::invalid_argument("solve_shared_support: mixed orders");
    }
  }
  if (!(opts.big_m > 0.0)) {
    throw std::invalid_argument("solve_shared_support: big-M must be positive");
  }
  std::vector<int> candidates = opts.allowed;
  if (candidates.empty()) {
    candidates.resize(d);
    for (int k = 0; k < d; ++k) candidates[k] = k;
  } else {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    if (candidates.front() < 0 || candidates.back() >= d) {
      throw std::invalid_argument(
          "solve_shared_support: candidate index out of range");
    }
  }
  const int tau = opts.sparsity;
  if (tau < 1 || tau > static_cast<int>(candidates.size())) {
    throw std::invalid_argument(
        "solve_shared_support: sparsity must lie in [1, |candidates|]: "
        "sparsity=" +
        std::to_string(tau) +
        ", candidates=" + std::to_string(candidates.size()));
  }
  const std::size_t blocks = systems.size();

  BvlsOptions bopts;
  bopts.kkt_tol = opts.kkt_tol;
  bopts.upper = opts.big_m;

  SparseFit fit;
  SolveStats& stats = fit.stats;
  long abandoned = 0;

  // w = 0 is always feasible, so the incumbent starts finite.
  double incumbent_f = 0.0;
  for (const GramSystem& gs : systems) incumbent_f += gs.constant;
  std::vector<Eigen::VectorXd> incumbent_w(
      blocks, Eigen::VectorXd::Zero(d));
  std::vector<int> incumbent_support;

  auto note_solution = [&](const BoundedSupportSolution& sol) {
    stats.max_kkt_residual = std::max(stats.max_kkt_residual,
                                      sol.kkt_residual);
    if (!sol.certified) ++stats.uncertified_bvls;
  };

  auto try_incumbent = [&](double f, const std::vector<Eigen::VectorXd>& ws,
                           const std::vector<int>& support) {
    if (f < incumbent_f) {
      incumbent_f = f;
      incumbent_w = ws;
      incumbent_support = support;
    }
  };

  if (opts.seed_with_greedy) {
    // Greedy support on the aggregate, refit per block: an early incumbent
    // that is often already optimal.
    const GramSystem agg = gram_aggregate(systems);
    NnspOptions nopts;
    nopts.sparsity = tau;
    nopts.upper = opts.big_m;
    nopts.kkt_tol = opts.kkt_tol;
    nopts.allowed = candidates;
    const GreedyFit seed = nnsp(agg, nopts);
    double f = 0.0;
    std::vector<Eigen::VectorXd> ws(blocks);
    std::vector<int> support;
    for (std::size_t g = 0; g < blocks; ++g) {
      const BoundedSupportSolution sol =
          restricted_fit(systems[g], seed.support, bopts);
      note_solution(sol);
      f += sol.objective;
      ws[g] = sol.w;
      for (int k : sol.support) support.push_back(k);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    try_incumbent(f, ws, support);
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long seq = 0;

  // Evaluates a node: bound, feasibility closure, or push with a branching
  // index. Returns false when the node budget is exhausted.
  auto evaluate = [&](std::vector<int> fin, std::vector<int> fout) {
    ++stats.nodes_explored;
    const bool saturated = static_cast<int>(fin.size()) == tau;
    const std::vector<int> allowed =
        saturated ? fin : sorted_difference(candidates, fout);

    double bound = 0.0;
    bool all_certified = true;
    std::vector<Eigen::VectorXd> ws(blocks);
    std::vector<int> support;
    double feasible_f = 0.0;
    for (std::size_t g = 0; g < blocks; ++g) {
      const BoundedSupportSolution sol = bvls_nonneg(systems[g], allowed,
                                                     bopts);
      note_solution(sol);
      // An uncertified relaxation cannot lower-bound the block; fall back
      // to 0, which every design-derived objective dominates.
      bound += sol.certified ? std::max(0.0, sol.objective) : 0.0;
      all_certified = all_certified && sol.certified;
      feasible_f += sol.objective;
      ws[g] = sol.w;
      for (int k : sol.support) support.push_back(k);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    const bool tau_sparse = static_cast<int>(support.size()) <= tau;
    const bool leaf = tau_sparse && all_certified;
    if (opts.on_node) {
      opts.on_node(BnbNodeView{fin, fout, bound, leaf});
    }

    if (tau_sparse) {
      // The relaxed solution is feasible for this node's subproblem, so its
      // value is an incumbent; with certified blocks it is the node optimum
      // and the subtree closes.
      try_incumbent(feasible_f, ws, support);
      if (all_certified) return;
      if (saturated) {
        // No way to branch further; the subtree keeps a trivial bound.
        ++abandoned;
        return;
      }
    }

    std::vector<char> free_mask(d, 0);
    for (int k : allowed) free_mask[k] = 1;
    for (int k : fin) free_mask[k] = 0;
    const int branch =
        branch_select(std::span<const Eigen::VectorXd>(ws), free_mask);
    if (branch == -1) {
      // Nothing left to branch on (all candidates already pinned); treat as
      // an uncertifiable dead end.
      ++abandoned;
      return;
    }
    Node node;
    node.forced_in = std::move(fin);
    node.forced_out = std::move(fout);
    node.bound = bound;
    node.branch_idx = branch;
    node.seq = seq++;
    open.push(std::move(node));
  };

  evaluate({}, {});

  bool budget_hit = false;
  double open_bound = incumbent_f;  // bound of the tree still open
  while (!open.empty()) {
    const Node node = open.top();
    if (incumbent_f - node.bound <= opts.gap_tol) {
      open_bound = node.bound;
      break;
    }
    if (stats.nodes_explored + 2 > opts.node_budget) {
      budget_hit = true;
      open_bound = node.bound;
      break;
    }
    open.pop();

    std::vector<int> fin = node.forced_in;
    std::vector<int> fout = node.forced_out;
    fin.insert(std::lower_bound(fin.begin(), fin.end(), node.branch_idx),
               node.branch_idx);
    fout.insert(std::lower_bound(fout.begin(), fout.end(), node.branch_idx),
                node.branch_idx);
    evaluate(std::move(fin), node.forced_out);
    evaluate(node.forced_in, std::move(fout));
  }
  if (open.empty()) open_bound = incumbent_f;

  stats.incumbent_objective = incumbent_f;
  stats.best_bound = abandoned > 0 ? 0.0 : std::min(open_bound, incumbent_f);
  stats.gap = incumbent_f - stats.best_bound;
  stats.certified = !budget_hit && abandoned == 0 && stats.gap <= opts.gap_tol;
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  fit.weights = std::move(incumbent_w);
  fit.support = std::move(incumbent_support);
  fit.objective = incumbent_f;
  const double edge = 1e-6;
  for (const Eigen::VectorXd& w : fit.weights) {
    for (int k = 0; k < w.size(); ++k) {
      if (w(k) != 0.0 && std::abs(w(k) - opts.big_m) <= edge) {
        fit.bigm_flagged = true;
      }
    }
  }
  return fit;
}

SparseFit solve_sar(const GramSystem& gs, const BnbOptions& opts) {
  return solve_shared_support(std::span<const GramSystem>(&gs, 1), opts);
}

}  // namespace sparsear
