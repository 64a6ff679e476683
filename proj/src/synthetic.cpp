#include "sparsear/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace sparsear {

namespace {

void check_lag_set(const std::vector<PlantedLag>& lags, double noise,
                   const std::string& what) {
  double sum = 0.0;
  for (const PlantedLag& pl : lags) {
    if (pl.lag < 1) {
      throw std::invalid_argument(what + ": lags must be >= 1");
    }
    if (pl.coef < 0.0) {
      throw std::invalid_argument(what + ": coefficients must be >= 0");
    }
    sum += pl.coef;
  }
  // A coefficient sum of exactly 1 is a unit-root cycle: unstable under
  // noise, but the intended exact-periodicity case when noise is zero.
  const bool stable = noise > 0.0 ? sum < 1.0 : sum <= 1.0;
  if (!stable) {
    throw std::invalid_argument(
        what + ": planted coefficients sum to " + std::to_string(sum) +
        ", which is unstable" +
        (noise > 0.0 ? " under noise (need sum < 1)" : " (need sum <= 1)"));
  }
}

int max_lag(const std::vector<PlantedLag>& lags) {
  int d = 0;
  for (const PlantedLag& pl : lags) d = std::max(d, pl.lag);
  return d;
}

std::vector<double> simulate(const std::vector<PlantedLag>& lags, int length,
                             double noise, std::mt19937_64& rng) {
  const int d = max_lag(lags);
  const long burn = 10L * d;
  const long total = d + burn + length;
  std::vector<double> x(static_cast<std::size_t>(total));
  std::uniform_real_distribution<double> init(0.5, 1.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < d; ++t) x[t] = init(rng);
  for (long t = d; t < total; ++t) {
    double v = 0.0;
    for (const PlantedLag& pl : lags) v += pl.coef * x[t - pl.lag];
    if (noise > 0.0) v += noise * gauss(rng);
    x[static_cast<std::size_t>(t)] = v;
  }
  return {x.end() - length, x.end()};
}

std::mt19937_64 cell_rng(std::uint64_t seed, int m, int n, int g) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(m),
                    static_cast<std::uint32_t>(n),
                    static_cast<std::uint32_t>(g)};
  return std::mt19937_64(seq);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (length < 1) {
    throw std::invalid_argument("synthetic: length must be >= 1");
  }
  if (noise < 0.0) {
    throw std::invalid_argument("synthetic: noise must be >= 0");
  }
  check_lag_set(lags, noise, "synthetic");
  const bool grid = grid_rows != 0 || grid_cols != 0 || grid_segments != 0;
  if (grid && (grid_rows < 1 || grid_cols < 1 || grid_segments < 1)) {
    throw std::invalid_argument(
        "synthetic: grid dims must all be positive (or all zero)");
  }
  if (!grid && !regions.empty()) {
    throw std::invalid_argument("synthetic: regions need a grid");
  }
  for (const RegionOverride& r : regions) {
    if (r.row_begin < 0 || r.row_end > grid_rows || r.row_begin >= r.row_end ||
        r.col_begin < 0 || r.col_end > grid_cols || r.col_begin >= r.col_end) {
      throw std::invalid_argument("synthetic: region out of grid bounds");
    }
    check_lag_set(r.lags, noise, "synthetic region");
  }
}

TimeSeries gen_univariate(const SyntheticSpec& spec) {
  spec.validate();
  if (spec.is_grid()) {
    throw std::invalid_argument("gen_univariate: spec has grid dims");
  }
  std::mt19937_64 rng = cell_rng(spec.seed, 0, 0, 0);
  TimeSeries x;
  x.values = simulate(spec.lags, spec.length, spec.noise, rng);
  return x;
}

GridSeries gen_grid(const SyntheticSpec& spec) {
  spec.validate();
  if (!spec.is_grid()) {
    throw std::invalid_argument("gen_grid: spec has no grid dims");
  }
  GridSeries g;
  g.rows = spec.grid_rows;
  g.cols = spec.grid_cols;
  g.num_segments = spec.grid_segments;
  g.seg_len.assign(spec.grid_segments, spec.length);
  g.cells.resize(g.cell_count());
  g.present.assign(g.cell_count(), 1);
  for (int m = 0; m < g.rows; ++m) {
    for (int n = 0; n < g.cols; ++n) {
      const std::vector<PlantedLag>* lags = &spec.lags;
      for (const RegionOverride& r : spec.regions) {
        if (m >= r.row_begin && m < r.row_end && n >= r.col_begin &&
            n < r.col_end) {
          lags = &r.lags;  // later overrides win
        }
      }
      for (int s = 0; s < g.num_segments; ++s) {
        std::mt19937_64 rng = cell_rng(spec.seed, m, n, s);
        g.cells[g.flat(m, n, s)] =
            simulate(*lags, spec.length, spec.noise, rng);
      }
    }
  }
  return g;
}

void write_ground_truth(const std::string& path, const SyntheticSpec& spec) {
  nlohmann::json j;
  j["length"] = spec.length;
  j["noise"] = spec.noise;
  j["seed"] = spec.seed;
  auto lag_array = [](const std::vector<PlantedLag>& lags) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PlantedLag& pl : lags) {
      arr.push_back({{"lag", pl.lag}, {"coef", pl.coef}});
    }
    return arr;
  };
  j["lags"] = lag_array(spec.lags);
  if (spec.is_grid()) {
    j["grid"] = {{"rows", spec.grid_rows},
                 {"cols", spec.grid_cols},
                 {"segments", spec.grid_segments}};
    nlohmann::json regions = nlohmann::json::array();
    for (const RegionOverride& r : spec.regions) {
      regions.push_back({{"row_begin", r.row_begin},
                         {"row_end", r.row_end},
                         {"col_begin", r.col_begin},
                         {"col_end", r.col_end},
                         {"lags", lag_array(r.lags)}});
    }
    j["regions"] = regions;
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write ground truth file: " + path);
  }
  out << j.dump(2) << "\n";
}

}  // namespace sparsear
