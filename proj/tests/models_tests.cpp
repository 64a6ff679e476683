#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsear/batch.hpp"
#include "sparsear/bvls.hpp"
#include "sparsear/design.hpp"
#include "sparsear/gram.hpp"
#include "sparsear/models.hpp"
#include "test_helpers.hpp"

using namespace sparsear;

namespace {

ModelConfig basic_config(int order, int sparsity, Solver solver = Solver::mio) {
  ModelConfig cfg;
  cfg.order = order;
  cfg.sparsity = sparsity;
  cfg.solver = solver;
  return cfg;
}

GridSeries single_cell_grid(const TimeSeries& x) {
  GridSeries g;
  g.rows = 1;
  g.cols = 1;
  g.num_segments = 1;
  g.seg_len = {static_cast<int>(x.values.size())};
  g.cells = {x.values};
  g.present = {1};
  return g;
}

GridSeries uniform_grid(int rows, int cols, int segs,
                        const std::vector<double>& values) {
  GridSeries g;
  g.rows = rows;
  g.cols = cols;
  g.num_segments = segs;
  g.seg_len.assign(segs, static_cast<int>(values.size()));
  g.cells.assign(static_cast<std::size_t>(rows) * cols * segs, values);
  g.present.assign(static_cast<std::size_t>(rows) * cols * segs, 1);
  return g;
}

bool same_bits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         (a - b).lpNorm<Eigen::Infinity>() == 0.0;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("fit_sar mio matches enumeration") {
  auto g = testutil::rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const TimeSeries x = testutil::gaussian_series(g, 60);
    const ModelConfig cfg = basic_config(6, 2);
    const SparseFit fit = fit_sar(x, cfg);
    REQUIRE(fit.stats.certified);
    const GramSystem gs = gram_from_design(build_design(x, 6));
    const testutil::EnumBest best = testutil::enumerate_best(gs, 2, cfg.big_m);
    CHECK(std::abs(fit.objective - best.objective) <=
          1e-8 * std::max(1.0, best.objective));
  }
}

TEST_CASE("fit_sar nnsp reports an uncertified heuristic fit") {
  auto g = testutil::rng(19);
  const TimeSeries x = testutil::gaussian_series(g, 60);
  const SparseFit fit = fit_sar(x, basic_config(6, 2, Solver::nnsp));
  CHECK(!fit.stats.certified);
  CHECK(fit.stats.best_bound == 0.0);
  CHECK(static_cast<int>(fit.support.size()) <= 2);
  CHECK(fit.objective >= 0.0);
}

TEST_CASE("fit_sar solver dominance on planted series") {
  auto g = testutil::rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const TimeSeries x =
        testutil::ar_series(g, {{2, 0.4}, {7, 0.35}, {11, 0.2}}, 150, 0.1);
    ModelConfig mio_cfg = basic_config(12, 2);
    mio_cfg.tol.gap_tol = 1e-12;
    ModelConfig dvp_cfg = basic_config(12, 2, Solver::mio_dvp);
    dvp_cfg.tau0 = 5;
    dvp_cfg.tol.gap_tol = 1e-12;
    const ModelConfig nnsp_cfg = basic_config(12, 2, Solver::nnsp);
    const double f_mio = fit_sar(x, mio_cfg).objective;
    const double f_dvp = fit_sar(x, dvp_cfg).objective;
    const double f_nnsp = fit_sar(x, nnsp_cfg).objective;
    CHECK(f_mio <= f_dvp + 1e-9);
    CHECK(f_dvp <= f_nnsp + 1e-9);
  }
}

TEST_CASE("fit_sar mio-dvp with full preselection equals mio") {
  auto g = testutil::rng(39);
  for (int trial = 0; trial < 10; ++trial) {
    const TimeSeries x = testutil::gaussian_series(g, 70);
    ModelConfig dvp_cfg = basic_config(8, 2, Solver::mio_dvp);
    dvp_cfg.tau0 = 8;
    const SparseFit a = fit_sar(x, basic_config(8, 2));
    const SparseFit b = fit_sar(x, dvp_cfg);
    CHECK(a.objective == b.objective);
    CHECK(a.support == b.support);
  }
}

TEST_CASE("fit_tvsar on identical segments matches the single-segment solve") {
  auto g = testutil::rng(49);
  const TimeSeries tile = testutil::ar_series(g, {{5, 0.9}}, 50, 0.02);
  TimeSeries x;
  for (int rep = 0; rep < 4; ++rep) {
    x.values.insert(x.values.end(), tile.values.begin(), tile.values.end());
  }
  const ModelConfig cfg = basic_config(7, 2);
  const TvSarResult tv = fit_tvsar(segment(x, 50).series, cfg);
  REQUIRE(tv.stats.certified);
  REQUIRE(tv.W.rows() == 4);

  const SparseFit single = fit_sar(tile, cfg);
  CHECK(tv.support == single.support);
  for (int seg = 0; seg < 4; ++seg) {
    CHECK((tv.W.row(seg).transpose() - single.weights[0])
              .lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("fit_tvsar with one segment equals fit_sar") {
  auto g = testutil::rng(59);
  const TimeSeries x = testutil::gaussian_series(g, 64);
  const ModelConfig cfg = basic_config(6, 2);
  const TvSarResult tv = fit_tvsar(segment(x, 64).series, cfg);
  const SparseFit flat = fit_sar(x, cfg);
  CHECK(tv.support == flat.support);
  CHECK(tv.objective == flat.objective);
  REQUIRE(tv.W.rows() == 1);
  CHECK(same_bits(tv.W.row(0).transpose(), flat.weights[0]));
}

TEST_CASE("fit_tvsar objective decomposes over segments") {
  auto g = testutil::rng(69);
  const TimeSeries x = testutil::ar_series(g, {{3, 0.6}}, 240, 0.3);
  const TvSarResult tv = fit_tvsar(segment(x, 60).series, basic_config(8, 2));
  REQUIRE(tv.segment_objectives.size() == 4);
  double sum = 0.0;
  for (double f : tv.segment_objectives) sum += f;
  CHECK(std::abs(sum - tv.objective) <= 1e-8 * std::max(1.0, tv.objective));
}

TEST_CASE("fit_tvsar recovers a planted shared support") {
  auto g = testutil::rng(79);
  int hits = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const TimeSeries x =
        testutil::ar_series(g, {{2, 0.45}, {9, 0.4}}, 360, 0.05);
    ModelConfig cfg = basic_config(10, 2, Solver::mio_dvp);
    cfg.tau0 = 4;
    const TvSarResult tv = fit_tvsar(segment(x, 120).series, cfg);
    if (tv.support == std::vector<int>{1, 8}) ++hits;
  }
  CHECK(hits >= 8);
}

TEST_CASE("fit_tvsar rejects the heuristic solver") {
  auto g = testutil::rng(89);
  const TimeSeries x = testutil::gaussian_series(g, 120);
  CHECK_THROWS_AS(
      fit_tvsar(segment(x, 60).series, basic_config(5, 2, Solver::nnsp)),
      std::invalid_argument);
}

TEST_CASE("single-cell stvsar reproduces fit_sar") {
  auto g = testutil::rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const TimeSeries x = testutil::ar_series(g, {{4, 0.7}}, 90, 0.2);
    const GridSeries grid = single_cell_grid(x);
    const ModelConfig cfg = basic_config(8, 2);
    const StvSarResult stv = fit_stvsar(grid, cfg);
    const SparseFit flat = fit_sar(x, cfg);
    REQUIRE(stv.support == flat.support);
    REQUIRE(stv.cell_weights.size() == 1);
    for (std::size_t j = 0; j < stv.support.size(); ++j) {
      CHECK(std::abs(stv.cell_weights[0](static_cast<long>(j)) -
                     flat.weights[0](stv.support[j])) <= 1e-9);
    }
    CHECK(std::abs(stv.cell_objectives[0] - flat.objective) <=
          1e-10 * std::max(1.0, flat.objective));
  }
}

TEST_CASE("identical cells get identical stage-2 weights") {
  auto g = testutil::rng(109);
  const TimeSeries x = testutil::ar_series(g, {{3, 0.65}}, 80, 0.25);
  const GridSeries grid = uniform_grid(3, 2, 2, x.values);
  const StvSarResult stv = fit_stvsar(grid, basic_config(6, 2));
  REQUIRE(stv.cell_weights.size() == 12);
  for (std::size_t c = 1; c < stv.cell_weights.size(); ++c) {
    CHECK(same_bits(stv.cell_weights[c], stv.cell_weights[0]));
    CHECK(stv.cell_objectives[c] == stv.cell_objectives[0]);
  }
  // With every cell equal, the per-cell refit solves the same restricted
  // subsystem as a direct fit on one copy.
  const GramSystem gs = gram_from_design(build_design(x, 6));
  BvlsOptions bopts;
  bopts.upper = 5.0;
  const BoundedSupportSolution ref = restricted_fit(gs, stv.support, bopts);
  for (std::size_t j = 0; j < stv.support.size(); ++j) {
    CHECK(std::abs(stv.cell_weights[0](static_cast<long>(j)) -
                   ref.w(stv.support[j])) <= 1e-8);
  }
}

TEST_CASE("per-cell refits never exceed the stage-1 total") {
  auto g = testutil::rng(119);
  GridSeries grid;
  grid.rows = 4;
  grid.cols = 3;
  grid.num_segments = 2;
  grid.seg_len = {70, 70};
  for (int c = 0; c < 4 * 3 * 2; ++c) {
    grid.cells.push_back(
        testutil::ar_series(g, {{2, 0.5}, {5, 0.3}}, 70, 0.2).values);
    grid.present.push_back(1);
  }
  const StvSarResult stv = fit_stvsar(grid, basic_config(6, 2));
  REQUIRE(stv.stage1_stats.certified);
  // Stage 1 forces one shared weight vector; freeing the cells on the same
  // support can only lower the summed objective.
  const double stage1_total = stv.stage1_stats.incumbent_objective;
  CHECK(stv.objective <= stage1_total + 1e-8 * std::max(1.0, stage1_total));
  double recomputed = 0.0;
  for (double f : stv.cell_objectives) {
    if (!std::isnan(f)) recomputed += f;
  }
  CHECK(std::abs(recomputed - stv.objective) <=
        1e-12 * std::max(1.0, recomputed));
}

TEST_CASE("constant cells are flagged and zeroed, not errors") {
  auto g = testutil::rng(129);
  const TimeSeries x = testutil::ar_series(g, {{2, 0.6}}, 60, 0.2);
  GridSeries grid = uniform_grid(2, 1, 1, x.values);
  grid.cells[1].assign(60, 4.25);
  const StvSarResult stv = fit_stvsar(grid, basic_config(5, 1));
  REQUIRE(stv.flagged_constant.size() == 2);
  CHECK(stv.flagged_constant[0] == 0);
  CHECK(stv.flagged_constant[1] == 1);
  CHECK(stv.cell_weights[1].lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(stv.cell_objectives[1] > 0.0);
}

TEST_CASE("masked cells keep NaN objectives and empty weights") {
  auto g = testutil::rng(139);
  const TimeSeries x = testutil::ar_series(g, {{2, 0.6}}, 60, 0.2);
  GridSeries grid = uniform_grid(2, 2, 1, x.values);
  grid.present[2] = 0;
  grid.cells[2].clear();
  const StvSarResult stv = fit_stvsar(grid, basic_config(5, 1));
  CHECK(std::isnan(stv.cell_objectives[2]));
  CHECK(stv.cell_weights[2].size() == 0);
  CHECK(!std::isnan(stv.cell_objectives[0]));
}

TEST_CASE("stvsar rejects the heuristic solver") {
  auto g = testutil::rng(149);
  const GridSeries grid = single_cell_grid(testutil::gaussian_series(g, 50));
  CHECK_THROWS_AS(fit_stvsar(grid, basic_config(5, 1, Solver::nnsp)),
                  std::invalid_argument);
}

TEST_CASE("seasonality_map extracts one lag across the grid") {
  auto g = testutil::rng(159);
  const TimeSeries a = testutil::ar_series(g, {{3, 0.8}}, 120, 0.05);
  const TimeSeries b = testutil::ar_series(g, {{3, 0.35}}, 120, 0.05);
  GridSeries grid;
  grid.rows = 1;
  grid.cols = 2;
  grid.num_segments = 1;
  grid.seg_len = {120};
  grid.cells = {a.values, b.values};
  grid.present = {1, 1};
  const StvSarResult stv = fit_stvsar(grid, basic_config(6, 1));
  REQUIRE(stv.support == std::vector<int>{2});
  const SeasonalityMap map = seasonality_map(stv, 2);
  CHECK(map.lag == 2);
  REQUIRE(map.values.size() == 2);
  // The strong-cycle cell carries the larger lag-3 weight.
  CHECK(map.values[0] > map.values[1]);
  CHECK(map.values[0] > 0.5);

  bool threw = false;
  try {
    seasonality_map(stv, 4);
  } catch (const std::invalid_argument& e) {
    threw = true;
    CHECK(std::string(e.what()).find("not in the fitted support") !=
          std::string::npos);
    CHECK(std::string(e.what()).find("{3}") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("serial and parallel aggregation agree") {
  auto g = testutil::rng(169);
  GridSeries grid;
  grid.rows = 5;
  grid.cols = 4;
  grid.num_segments = 2;
  grid.seg_len = {40, 40};
  for (int c = 0; c < 5 * 4 * 2; ++c) {
    grid.cells.push_back(testutil::gaussian_series(g, 40).values);
    grid.present.push_back(1);
  }
  const GramSystem par = aggregate_grid_grams(grid, 6, 0);
  const GramSystem ser = aggregate_grid_grams_serial(grid, 6);
  const double scale = std::max(1.0, ser.P.lpNorm<Eigen::Infinity>());
  CHECK((par.P - ser.P).lpNorm<Eigen::Infinity>() <= 1e-10 * scale);
  CHECK((par.q - ser.q).lpNorm<Eigen::Infinity>() <= 1e-10 * scale);
  CHECK(std::abs(par.constant - ser.constant) <= 1e-10 * scale);

  // Thread count must not change the folded result at all.
  const GramSystem one = aggregate_grid_grams(grid, 6, 1);
  const GramSystem four = aggregate_grid_grams(grid, 6, 4);
  CHECK((one.P - four.P).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((one.q - four.q).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(one.constant == four.constant);
}

TEST_CASE("serial and parallel stage-2 agree bit for bit") {
  auto g = testutil::rng(179);
  GridSeries grid;
  grid.rows = 6;
  grid.cols = 3;
  grid.num_segments = 1;
  grid.seg_len = {50};
  for (int c = 0; c < 18; ++c) {
    grid.cells.push_back(testutil::ar_series(g, {{2, 0.55}}, 50, 0.3).values);
    grid.present.push_back(1);
  }
  const std::vector<int> support{1, 4};
  const Stage2Result par = stage2_fit_grid(grid, 6, support, 5.0, 1e-9, 4);
  const Stage2Result ser = stage2_fit_grid_serial(grid, 6, support, 5.0, 1e-9);
  REQUIRE(par.weights.size() == ser.weights.size());
  for (std::size_t c = 0; c < par.weights.size(); ++c) {
    CHECK(same_bits(par.weights[c], ser.weights[c]));
    CHECK(par.objectives[c] == ser.objectives[c]);
  }
  CHECK(par.max_kkt_residual == ser.max_kkt_residual);
}

TEST_CASE("grid validation names the offending cell") {
  auto g = testutil::rng(189);
  GridSeries grid =
      uniform_grid(2, 2, 1, testutil::gaussian_series(g, 30).values);
  grid.cells[3].resize(5);  // shorter than the order
  CHECK_THROWS_AS(aggregate_grid_grams(grid, 6, 0), std::invalid_argument);
}

}  // TEST_SUITE
