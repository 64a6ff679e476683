#include "sparsear/nnsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparsear {

namespace {

std::vector<int> default_allowed(int d) {
  std::vector<int> all(d);
  for (int k = 0; k < d; ++k) all[k] = k;
  return all;
}

// Indices of the s largest keys among `pool`, ties to the smaller index,
// returned ascending.
std::vector<int> top_indices(const std::vector<int>& pool,
                             const Eigen::VectorXd& keys, int s) {
  std::vector<int> ranked = pool;
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    if (keys(a) != keys(b)) return keys(a) > keys(b);
    return a < b;
  });
  ranked.resize(std::min<std::size_t>(ranked.size(), s));
  std::sort(ranked.begin(), ranked.end());
  return ranked;
}

}  // namespace

GreedyFit nnsp(const GramSystem& gs, const NnspOptions& opts) {
  const int d = gs.order();
  if (opts.sparsity < 1) {
    throw std::invalid_argument("nnsp: sparsity must be >= 1");
  }
  if (opts.max_iter < 1) {
    throw std::invalid_argument("nnsp: max_iter must be >= 1");
  }
  std::vector<int> allowed =
      opts.allowed.empty() ? default_allowed(d) : opts.allowed;
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
  if (!allowed.empty() && (allowed.front() < 0 || allowed.back() >= d)) {
    throw std::invalid_argument("nnsp: allowed index out of range");
  }
  const int s = std::min<int>(opts.sparsity, static_cast<int>(allowed.size()));

  BvlsOptions bopts;
  bopts.kkt_tol = opts.kkt_tol;
  bopts.upper = opts.upper;

  GreedyFit fit;
  fit.w = Eigen::VectorXd::Zero(d);
  fit.objective = gs.constant;  // w = 0 start

  Eigen::VectorXd w = fit.w;
  std::vector<int> kept;
  double f_prev = gs.constant;
  // Any refit admits w = 0, so iteration 1 never exceeds the zero start and
  // the best iterate is always a post-iteration state.
  double best_f = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    fit.iterations = iter;

    // Merge the strongest correlations into the kept set.
    const Eigen::VectorXd c = (gs.q - gs.P * w).cwiseAbs();
    std::vector<int> merged = top_indices(allowed, c, s);
    merged.insert(merged.end(), kept.begin(), kept.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    const BoundedSupportSolution grown = bvls_nonneg(gs, merged, bopts);

    // Prune back to the s largest refit entries. Zeros count, so the kept
    // set always has size s (ties fall to the smaller lag).
    const std::vector<int> kept_new = top_indices(merged, grown.w, s);
    const BoundedSupportSolution pruned = bvls_nonneg(gs, kept_new, bopts);

    fit.max_kkt_residual = std::max(
        fit.max_kkt_residual, std::max(grown.kkt_residual, pruned.kkt_residual));
    if (!grown.certified) ++fit.uncertified_refits;
    if (!pruned.certified) ++fit.uncertified_refits;

    w = pruned.w;
    fit.objective_trace.push_back(pruned.objective);
    if (pruned.objective < best_f) {
      best_f = pruned.objective;
      fit.w = pruned.w;
      fit.support = kept_new;
      fit.objective = pruned.objective;
    }

    const bool stabilized = kept_new == kept;
    const bool stalled =
        std::abs(f_prev - pruned.objective) <=
        opts.tol_res * std::max(1.0, std::abs(f_prev));
    kept = kept_new;
    f_prev = pruned.objective;
    if (stabilized || stalled) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

GreedyFit nnsp(const DesignPair& dp, const NnspOptions& opts) {
  return nnsp(gram_from_design(dp), opts);
}

std::vector<int> dvp_candidates(std::span<const GramSystem> systems, int tau0,
                                const NnspOptions& base) {
  if (systems.empty()) {
    throw std::invalid_argument("dvp_candidates: empty segment list");
  }
  std::vector<int> uni;
  for (const GramSystem& gs : systems) {
    if (gs.order() != systems.front().order()) {
      throw std::invalid_argument("dvp_candidates: mixed orders");
    }
    NnspOptions opts = base;
    opts.sparsity = tau0;
    const GreedyFit fit = nnsp(gs, opts);
    uni.insert(uni.end(), fit.support.begin(), fit.support.end());
  }
  std::sort(uni.begin(), uni.end());
  uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
  return uni;
}

std::vector<int> dvp_candidates(std::span<const DesignPair> segments, int tau0,
                                const NnspOptions& base) {
  std::vector<GramSystem> systems;
  systems.reserve(segments.size());
  for (const DesignPair& dp : segments) {
    systems.push_back(gram_from_design(dp));
  }
  return dvp_candidates(std::span<const GramSystem>(systems), tau0, base);
}

}  // namespace sparsear
