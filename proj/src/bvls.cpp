#include "sparsear/bvls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsear {

namespace {

enum class Status : char { lower, free_var, upper };

// Solves Ps z = rhs for a PSD block. LDLT first; on a non-finite or
// inconsistent result (rank-deficient Ps), fall back to the deterministic
// minimum-norm solution.
Eigen::VectorXd solve_psd(const Eigen::MatrixXd& Ps,
                          const Eigen::VectorXd& rhs) {
  Eigen::VectorXd z = Ps.ldlt().solve(rhs);
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (!z.allFinite() ||
      (Ps * z - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * scale) {
    z = Ps.completeOrthogonalDecomposition().solve(rhs);
  }
  return z;
}

std::vector<int> clean_allowed(std::span<const int> allowed, int d) {
  std::vector<int> idx(allowed.begin(), allowed.end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (!idx.empty() && (idx.front() < 0 || idx.back() >= d)) {
    throw std::invalid_argument("bvls_nonneg: allowed index out of range");
  }
  return idx;
}

// Worst KKT violation of the box problem at w, judged from the point alone:
// at 0 the gradient may not push inward, at the cap it may not push outward,
// in the interior it must vanish.
double kkt_violation(const Eigen::MatrixXd& Ps, const Eigen::VectorXd& qs,
                     const Eigen::VectorXd& w, double upper) {
  const Eigen::VectorXd g = 2.0 * (Ps * w - qs);
  double worst = 0.0;
  for (int k = 0; k < w.size(); ++k) {
    double viol;
    if (w(k) <= 0.0) {
      viol = std::max(0.0, -g(k));
    } else if (std::isfinite(upper) && w(k) >= upper) {
      viol = std::max(0.0, g(k));
    } else {
      viol = std::abs(g(k));
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

}  // namespace

BoundedSupportSolution bvls_nonneg(const GramSystem& gs,
                                   std::span<const int> allowed,
                                   const BvlsOptions& opts) {
  const int d = gs.order();
  if (!(opts.upper > 0.0)) {
    throw std::invalid_argument("bvls_nonneg: upper bound must be positive");
  }
  const std::vector<int> idx = clean_allowed(allowed, d);
  const int m = static_cast<int>(idx.size());

  BoundedSupportSolution out;
  out.w = Eigen::VectorXd::Zero(d);
  if (m == 0) {
    out.objective = gs.constant;
    out.certified = true;
    return out;
  }

  Eigen::MatrixXd Ps(m, m);
  Eigen::VectorXd qs(m);
  for (int a = 0; a < m; ++a) {
    qs(a) = gs.q(idx[a]);
    for (int b = 0; b < m; ++b) {
      Ps(a, b) = gs.P(idx[a], idx[b]);
    }
  }
  // Optimality is judged on the subproblem's own scale.
  const double scale = std::max(1.0, qs.lpNorm<Eigen::Infinity>());
  const double tol = opts.kkt_tol * scale;
  const double upper = opts.upper;
  const int cap = opts.max_iter_factor * m;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  std::vector<Status> status(m, Status::lower);
  // Variables whose entry produced no progress; cleared whenever w moves.
  // Blocks cycling on degenerate free-set solves.
  std::vector<char> banned(m, 0);
  auto fval = [&](const Eigen::VectorXd& v) {
    return v.dot(Ps * v) - 2.0 * v.dot(qs) + gs.constant;
  };

  Eigen::VectorXd best_w = w;
  double best_f = fval(w);
  int changes = 0;

  while (changes < cap) {
    const Eigen::VectorXd g = 2.0 * (Ps * w - qs);
    int enter = -1;
    double enter_viol = tol;
    for (int k = 0; k < m; ++k) {
      if (banned[k]) continue;
      double viol = 0.0;
      if (status[k] == Status::lower) {
        viol = -g(k);
      } else if (status[k] == Status::upper) {
        viol = g(k);
      }
      if (viol > enter_viol) {  // strict: ties keep the smallest lag
        enter_viol = viol;
        enter = k;
      }
    }
    if (enter == -1) break;

    status[enter] = Status::free_var;
    ++changes;
    const Eigen::VectorXd w_before = w;

    while (changes < cap) {
      std::vector<int> freeset;
      for (int k = 0; k < m; ++k) {
        if (status[k] == Status::free_var) freeset.push_back(k);
      }
      const int nf = static_cast<int>(freeset.size());
      if (nf == 0) break;
      Eigen::MatrixXd Pf(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        double bound_part = 0.0;
        for (int k = 0; k < m; ++k) {
          if (status[k] == Status::upper) {
            bound_part += Ps(freeset[a], k) * upper;
          }
        }
        rhs(a) = qs(freeset[a]) - bound_part;
        for (int b = 0; b < nf; ++b) {
          Pf(a, b) = Ps(freeset[a], freeset[b]);
        }
      }
      const Eigen::VectorXd z = solve_psd(Pf, rhs);

      double alpha = 1.0;
      for (int a = 0; a < nf; ++a) {
        const int k = freeset[a];
        double bound;
        if (z(a) < 0.0) {
          bound = 0.0;
        } else if (std::isfinite(upper) && z(a) > upper) {
          bound = upper;
        } else {
          continue;
        }
        const double denom = z(a) - w(k);
        if (denom == 0.0) continue;
        alpha = std::min(alpha, std::max(0.0, (bound - w(k)) / denom));
      }

      if (alpha >= 1.0) {
        for (int a = 0; a < nf; ++a) w(freeset[a]) = z(a);
        break;
      }
      const double snap = 1e-12;
      bool pinned = false;
      for (int a = 0; a < nf; ++a) {
        const int k = freeset[a];
        w(k) += alpha * (z(a) - w(k));
        // Pin only variables that landed on the bound they were crossing;
        // ones at a bound but heading inward stay free.
        if (z(a) < 0.0 && w(k) <= snap) {
          w(k) = 0.0;
          status[k] = Status::lower;
          pinned = true;
          ++changes;
        } else if (std::isfinite(upper) && z(a) > upper &&
                   upper - w(k) <= snap * std::max(1.0, upper)) {
          w(k) = upper;
          status[k] = Status::upper;
          pinned = true;
          ++changes;
        }
      }
      if (!pinned) {
        // Round-off kept every blocker strictly inside; pin the worst one.
        int apin = 0;
        double worst_over = -1.0;
        for (int a = 0; a < nf; ++a) {
          double over = 0.0;
          if (z(a) < 0.0) {
            over = -z(a);
          } else if (std::isfinite(upper) && z(a) > upper) {
            over = z(a) - upper;
          }
          if (over > worst_over) {
            worst_over = over;
            apin = a;
          }
        }
        const int k = freeset[apin];
        if (z(apin) < 0.0) {
          w(k) = 0.0;
          status[k] = Status::lower;
        } else {
          w(k) = upper;
          status[k] = Status::upper;
        }
        ++changes;
      }
    }

    if ((w - w_before).lpNorm<Eigen::Infinity>() > 0.0) {
      std::fill(banned.begin(), banned.end(), 0);
    } else {
      banned[enter] = 1;  // defective entry; try the next violator
    }
    const double f = fval(w);
    if (f < best_f) {
      best_f = f;
      best_w = w;
    }
  }

  const double f = fval(w);
  if (f <= best_f) {
    best_f = f;
    best_w = w;
  }

  out.objective = best_f;
  out.kkt_residual = kkt_violation(Ps, qs, best_w, upper) / scale;
  out.certified = out.kkt_residual <= opts.kkt_tol;
  out.active_set_changes = changes;
  for (int a = 0; a < m; ++a) {
    if (best_w(a) != 0.0) {
      out.w(idx[a]) = best_w(a);
      out.support.push_back(idx[a]);
    }
  }
  return out;
}

BoundedSupportSolution bvls_nonneg(const GramSystem& gs,
                                   const BvlsOptions& opts) {
  std::vector<int> all(gs.order());
  for (int k = 0; k < gs.order(); ++k) all[k] = k;
  return bvls_nonneg(gs, all, opts);
}

BoundedSupportSolution restricted_fit(const GramSystem& gs,
                                      std::span<const int> support,
                                      const BvlsOptions& opts) {
  return bvls_nonneg(gs, support, opts);
}

}  // namespace sparsear
