#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "obtree/error.hpp"
#include "obtree/evaluate.hpp"
#include "obtree/rng.hpp"
#include "obtree/synth.hpp"

using namespace obtree;

namespace {

RawData synth_raw(std::uint64_t seed, std::size_t n = 160, int depth = 1, double sigma = 0.02) {
    SynthSpec spec;
    spec.depth = depth;
    spec.p = 2;
    spec.n = n;
    spec.noise_sigma = sigma;
    spec.margin = 0.02;
    spec.seed = seed;
    SynthData synth = make_oblique_data(spec);
    RawData raw;
    raw.features = synth.ds.features;
    raw.targets = synth.ds.targets;
    return raw;
}

} // namespace

TEST_SUITE("evaluate") {

TEST_CASE("r2: perfect, mean-level, and affine-shift behavior") {
    std::vector<double> y = {1.0, 2.0, 3.0, 4.0};
    Score perfect = r2_score(y, y);
    CHECK(perfect.r2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(perfect.sse == 0.0);
    CHECK(perfect.n_eval == 4);

    std::vector<double> at_mean(4, 2.5);
    CHECK(r2_score(y, at_mean).r2 == doctest::Approx(0.0).epsilon(1e-15));

    // An always-wrong constant scores negative.
    std::vector<double> wrong(4, 10.0);
    CHECK(r2_score(y, wrong).r2 < 0.0);

    // Frozen small case: y={1,2,3}, pred={1.1,1.9,3.2}.
    // SSE=0.06, SST=2, r2=0.97.
    Score s = r2_score({1.0, 2.0, 3.0}, {1.1, 1.9, 3.2});
    CHECK(s.r2 == doctest::Approx(0.97).epsilon(1e-12));
    CHECK(s.sse == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("r2: error cases") {
    CHECK_THROWS_AS(r2_score({1.0, 2.0}, {1.0}), Error);
    CHECK_THROWS_AS(r2_score({1.0}, {1.0}), Error);
    CHECK_THROWS_AS(r2_score({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("paired t-test: frozen reference") {
    std::vector<double> a = {0.82, 0.79, 0.91, 0.88, 0.74, 0.86, 0.93, 0.81};
    std::vector<double> b = {0.80, 0.77, 0.90, 0.85, 0.76, 0.83, 0.89, 0.78};
    TTestResult r = paired_ttest(a, b);
    CHECK(r.dof == 7);
    CHECK(r.t_statistic == doctest::Approx(3.05505046330389).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(0.0184515285130159).epsilon(1e-9));
    CHECK(r.ci_low == doctest::Approx(0.00451990053849679).epsilon(1e-9));
    CHECK(r.ci_high == doctest::Approx(0.0354800994615032).epsilon(1e-9));

    // Antisymmetry: swapping the arms flips t and the interval.
    TTestResult s = paired_ttest(b, a);
    CHECK(s.t_statistic == doctest::Approx(-r.t_statistic).epsilon(1e-12));
    CHECK(s.p_value == doctest::Approx(r.p_value).epsilon(1e-12));
    CHECK(s.ci_low == doctest::Approx(-r.ci_high).epsilon(1e-12));
    CHECK(s.ci_high == doctest::Approx(-r.ci_low).epsilon(1e-12));
}

TEST_CASE("paired t-test: degenerate inputs") {
    std::vector<double> same = {0.5, 0.6, 0.7};
    TTestResult zero = paired_ttest(same, same);
    CHECK(zero.t_statistic == 0.0);
    CHECK(zero.p_value == 1.0);

    // Constant nonzero difference: no variance, certain direction.
    TTestResult sure = paired_ttest({1.0, 2.0, 3.0}, {0.5, 1.5, 2.5});
    CHECK(sure.p_value == 0.0);
    CHECK(std::fabs(sure.t_statistic) >= 1e308);

    CHECK_THROWS_AS(paired_ttest({1.0}, {2.0}), Error);
    CHECK_THROWS_AS(paired_ttest({1.0, 2.0}, {2.0}), Error);
}

TEST_CASE("friedman ranks: frozen 4x4 table") {
    Matrix table(4, 4);
    double rows[4][4] = {{0.90, 0.85, 0.70, 0.85},
                         {0.60, 0.65, 0.55, 0.50},
                         {0.88, 0.88, 0.88, 0.80},
                         {0.40, 0.45, 0.35, 0.45}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) table(i, j) = rows[i][j];
    std::vector<double> ranks = friedman_rank(table);
    REQUIRE(ranks.size() == 4);
    CHECK(ranks[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ranks[1] == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(ranks[2] == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(ranks[3] == doctest::Approx(3.0).epsilon(1e-12));
    // Mean ranks always sum to m(m+1)/2.
    CHECK(ranks[0] + ranks[1] + ranks[2] + ranks[3] == doctest::Approx(10.0).epsilon(1e-12));

    Matrix empty(0, 3);
    CHECK_THROWS_AS(friedman_rank(empty), Error);
}

TEST_CASE("model kind names round-trip") {
    for (ModelKind k :
         {ModelKind::get, ModelKind::get_linear, ModelKind::cart, ModelKind::random_forest}) {
        CHECK(parse_model_kind(model_kind_name(k)) == k);
    }
    CHECK_THROWS_AS(parse_model_kind("nonsense"), Error);
}

TEST_CASE("predict_any and count_parameters_any dispatch correctly") {
    RawData raw = synth_raw(31);
    Dataset ds = normalize(raw);
    AxisTree cart = fit_cart(ds, 2);
    AnyModel m = cart;
    CHECK(predict_any(m, ds.features) == predict_baseline(cart, ds.features));
    CHECK(count_parameters_any(m) == count_parameters(cart));
}

TEST_CASE("measure_seconds returns a nonnegative mean") {
    volatile double sink = 0.0;
    double s = measure_seconds(
        [&] {
            for (int i = 0; i < 1000; ++i) sink = sink + 1.0;
        },
        5);
    CHECK(s >= 0.0);
    CHECK(std::isfinite(s));
}

TEST_CASE("tune_depth needs a validation partition") {
    RawData raw = synth_raw(32);
    TuneConfig cfg;
    cfg.split.mode = SplitMode::holdout_75_25;
    CHECK_THROWS_AS(tune_depth(raw, ModelKind::cart, {1, 2}, cfg), Error);
}

TEST_CASE("tune_depth picks a grid depth, fills every score, and is deterministic") {
    RawData raw = synth_raw(33, 240, 2);
    TuneConfig cfg;
    cfg.split.mode = SplitMode::holdout_50_25_25;
    cfg.split.seed = 5;
    std::vector<int> grid = {1, 2, 3, 4};
    TuneResult r1 = tune_depth(raw, ModelKind::cart, grid, cfg);
    REQUIRE(r1.depth_scores.size() == grid.size());
    bool in_grid = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r1.depth_scores[i].depth == grid[i]);
        CHECK(!r1.depth_scores[i].failed);
        in_grid |= r1.best_depth == grid[i];
    }
    CHECK(in_grid);
    // The partition covers all rows exactly once.
    std::set<std::size_t> seen;
    for (auto i : r1.parts.train) seen.insert(i);
    for (auto i : r1.parts.val) seen.insert(i);
    for (auto i : r1.parts.test) seen.insert(i);
    CHECK(seen.size() == raw.targets.size());

    TuneResult r2 = tune_depth(raw, ModelKind::cart, grid, cfg);
    CHECK(r1.best_depth == r2.best_depth);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(r1.depth_scores[i].val_r2 == r2.depth_scores[i].val_r2);
}

TEST_CASE("tune_depth on tree-shaped data prefers the generating depth over depth 1") {
    // Depth-2 margin data with low noise: depth 1 cannot represent it, so
    // the validation score at depth >= 2 must win.
    RawData raw = synth_raw(34, 400, 2, 0.01);
    TuneConfig cfg;
    cfg.split.mode = SplitMode::holdout_50_25_25;
    cfg.split.seed = 7;
    TuneResult r = tune_depth(raw, ModelKind::cart, {1, 4}, cfg);
    CHECK(r.best_depth == 4);
}

TEST_CASE("tune_depth retrains an oblique model usable for prediction") {
    RawData raw = synth_raw(35, 150, 1);
    TuneConfig cfg;
    cfg.split.mode = SplitMode::holdout_50_25_25;
    cfg.split.seed = 9;
    cfg.train.n_start = 2;
    cfg.train.n_epoch = 60;
    TuneResult r = tune_depth(raw, ModelKind::get, {1, 2}, cfg);
    const ObliqueTree* tree = std::get_if<ObliqueTree>(&r.model);
    REQUIRE(tree != nullptr);
    CHECK((r.best_depth == 1 || r.best_depth == 2));
    CHECK(tree->depth == r.best_depth);
    // Transform statistics must come from the retrain rows only.
    REQUIRE(r.norm.feat_min.size() == raw.features.cols());
    // Scoring the held-out test rows end to end stays finite.
    RawData test_raw = subset(raw, r.parts.test);
    Dataset test_ds = apply_transform(test_raw, r.norm);
    std::vector<double> pred = predict(*tree, test_ds.features);
    for (double v : pred) CHECK(std::isfinite(v));
}

TEST_CASE("bench: shapes, shared split, and a complete report") {
    std::vector<RawData> datasets = {synth_raw(36, 150, 1), synth_raw(37, 150, 1)};
    std::vector<std::string> names = {"synth_a", "synth_b"};
    BenchConfig cfg;
    cfg.models = {ModelKind::cart, ModelKind::random_forest};
    cfg.depth_grid = {1, 2};
    cfg.rf_depth_grid = {2, 4};
    cfg.rf_trees_grid = {5, 10};
    cfg.tune.split.mode = SplitMode::holdout_50_25_25;
    cfg.tune.split.seed = 11;
    cfg.tune.forest_trees = 10;
    cfg.time_repetitions = 2;
    BenchReport rep = run_bench(datasets, names, cfg);

    REQUIRE(rep.dataset_names == names);
    REQUIRE(rep.models == cfg.models);
    REQUIRE(rep.cells.size() == 2);
    for (const auto& row : rep.cells) {
        REQUIRE(row.size() == 2);
        for (const auto& cell : row) {
            CHECK(!cell.failed);
            CHECK(std::isfinite(cell.test_r2));
            CHECK(cell.parameter_count > 0);
            CHECK(cell.train_seconds >= 0.0);
            CHECK(cell.predict_seconds >= 0.0);
        }
        CHECK(row[0].trees == 1);
        CHECK((row[1].trees == 5 || row[1].trees == 10));
    }
    REQUIRE(rep.mean_r2.size() == 2);
    for (std::size_t m = 0; m < 2; ++m) {
        double mean = 0.5 * (rep.cells[0][m].test_r2 + rep.cells[1][m].test_r2);
        CHECK(rep.mean_r2[m] == doctest::Approx(mean).epsilon(1e-12));
    }
    REQUIRE(rep.friedman.size() == 2);
    CHECK(rep.friedman[0] + rep.friedman[1] == doctest::Approx(3.0).epsilon(1e-12));
    REQUIRE(rep.ttests.size() == 1); // one unordered model pair
    CHECK(rep.ttests[0].result.dof == 1);

    std::string table = format_bench_table(rep);
    CHECK(table.find("cart") != std::string::npos);
    CHECK(table.find("rf") != std::string::npos);
    CHECK(table.find("depth") != std::string::npos);
    CHECK(table.find("params") != std::string::npos);
}

} // TEST_SUITE
