#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "obtree/baselines.hpp"
#include "obtree/error.hpp"
#include "obtree/rng.hpp"
#include "obtree/synth.hpp"
#include "oracles.hpp"

using namespace obtree;

namespace {

Dataset rand_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
    Dataset ds;
    ds.features = Matrix(n, p);
    Rng rng(seed);
    for (auto& v : ds.features.storage()) v = rng.next_double();
    ds.targets.resize(n);
    for (auto& v : ds.targets) v = rng.next_double();
    return ds;
}

double sse(const std::vector<double>& pred, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return s;
}

bool same_axis_tree(const AxisTree& a, const AxisTree& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const auto& x = a.nodes[i];
        const auto& y = b.nodes[i];
        if (x.feature != y.feature || x.threshold != y.threshold || x.value != y.value ||
            x.left != y.left || x.right != y.right)
            return false;
    }
    return true;
}

} // namespace

TEST_SUITE("baselines") {

TEST_CASE("depth-1 root split matches the exhaustive oracle") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        Dataset ds = rand_dataset(40, 3, seed);
        AxisTree t = fit_cart(ds, 1);
        REQUIRE(!t.empty());
        const auto& root = t.nodes[0];
        std::vector<std::size_t> all(ds.size());
        std::iota(all.begin(), all.end(), 0);
        oracle::BruteSplit best = oracle::brute_force_split(ds.features, ds.targets, all);
        REQUIRE(best.feature >= 0);
        CHECK(root.feature == best.feature);
        CHECK(root.threshold == doctest::Approx(best.threshold).epsilon(1e-12));
        // Children are leaves at depth 1; their SSE must equal the oracle's.
        std::vector<double> pred = predict_baseline(t, ds.features);
        CHECK(sse(pred, ds.targets) == doctest::Approx(best.sse).epsilon(1e-9));
    }
}

TEST_CASE("boundary rows route left on equality") {
    // Feature values {0,0,1,1} split at midpoint 0.5; a row exactly at the
    // threshold must take the left branch (x <= thr goes left).
    Dataset ds;
    ds.features = Matrix(4, 1);
    ds.features(0, 0) = 0.0;
    ds.features(1, 0) = 0.0;
    ds.features(2, 0) = 1.0;
    ds.features(3, 0) = 1.0;
    ds.targets = {0.0, 0.0, 1.0, 1.0};
    AxisTree t = fit_cart(ds, 1);
    REQUIRE(t.nodes[0].feature == 0);
    REQUIRE(t.nodes[0].threshold == doctest::Approx(0.5).epsilon(1e-15));
    Matrix probe(1, 1);
    probe(0, 0) = 0.5;
    auto pred = predict_baseline(t, probe);
    CHECK(pred[0] == 0.0); // left leaf mean
}

TEST_CASE("tie between equal splits goes to the lowest feature and threshold") {
    // Feature 0 and feature 1 both split the targets perfectly.
    Dataset ds;
    ds.features = Matrix(4, 2);
    // x0: 0 0 1 1, x1: 0 0 1 1 (identical columns), y: 0 0 1 1
    for (std::size_t i = 0; i < 4; ++i) {
        double v = i < 2 ? 0.0 : 1.0;
        ds.features(i, 0) = v;
        ds.features(i, 1) = v;
    }
    ds.targets = {0.0, 0.0, 1.0, 1.0};
    AxisTree t = fit_cart(ds, 1);
    CHECK(t.nodes[0].feature == 0);
}

TEST_CASE("constant targets produce a single-leaf tree") {
    Dataset ds = rand_dataset(30, 2, 3);
    for (auto& y : ds.targets) y = 0.7;
    AxisTree t = fit_cart(ds, 4);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].feature == -1);
    CHECK(t.nodes[0].value == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(tree_depth(t) == 0);
}

TEST_CASE("min_samples_split stops growth") {
    Dataset ds = rand_dataset(10, 2, 4);
    AxisTree t = fit_cart(ds, 10, 11); // can never split 10 rows
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].feature == -1);
    double mean = std::accumulate(ds.targets.begin(), ds.targets.end(), 0.0) / 10.0;
    CHECK(t.nodes[0].value == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("max_depth caps the tree") {
    Dataset ds = rand_dataset(200, 3, 5);
    for (int d = 1; d <= 5; ++d) {
        AxisTree t = fit_cart(ds, d);
        CHECK(tree_depth(t) <= d);
    }
    // Deeper budgets never fit worse on the training set.
    double prev = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 8; ++d) {
        AxisTree t = fit_cart(ds, d);
        double s = sse(predict_baseline(t, ds.features), ds.targets);
        CHECK(s <= prev + 1e-9);
        prev = s;
    }
}

TEST_CASE("deep cart drives training SSE to zero on distinct rows") {
    Dataset ds = rand_dataset(64, 2, 6);
    AxisTree t = fit_cart(ds, 30);
    CHECK(sse(predict_baseline(t, ds.features), ds.targets) == doctest::Approx(0.0).epsilon(1e-16));
}

TEST_CASE("cart rejects bad arguments") {
    Dataset ds = rand_dataset(10, 2, 7);
    CHECK_THROWS_AS(fit_cart(ds, 0), Error);
    Dataset empty;
    empty.features = Matrix(0, 2);
    CHECK_THROWS_AS(fit_cart(empty, 2), Error);
}

TEST_CASE("cart is deterministic") {
    Dataset ds = rand_dataset(80, 4, 8);
    AxisTree a = fit_cart(ds, 5);
    AxisTree b = fit_cart(ds, 5);
    CHECK(same_axis_tree(a, b));
}

TEST_CASE("forest determinism, including across thread counts") {
    Dataset ds = rand_dataset(60, 3, 9);
    Forest f1 = fit_forest(ds, 7, 4, 0, 42);
    Forest f2 = fit_forest(ds, 7, 4, 0, 42);
    Forest f4 = fit_forest(ds, 7, 4, 0, 42, 2, true, 4);
    REQUIRE(f1.trees.size() == 7);
    for (std::size_t s = 0; s < 7; ++s) {
        CHECK(same_axis_tree(f1.trees[s], f2.trees[s]));
        CHECK(same_axis_tree(f1.trees[s], f4.trees[s]));
        CHECK(f1.tree_seeds[s] == derive_seed(42, s));
    }
    Forest other = fit_forest(ds, 7, 4, 0, 43);
    bool any_diff = false;
    for (std::size_t s = 0; s < 7; ++s) any_diff |= !same_axis_tree(f1.trees[s], other.trees[s]);
    CHECK(any_diff);
}

TEST_CASE("forest m defaults to max(1, p/3)") {
    Dataset ds3 = rand_dataset(30, 3, 10);
    CHECK(fit_forest(ds3, 2, 3, 0, 1).m == 1);
    Dataset ds7 = rand_dataset(30, 7, 11);
    CHECK(fit_forest(ds7, 2, 3, 0, 1).m == 2);
    Dataset ds2 = rand_dataset(30, 2, 12);
    CHECK(fit_forest(ds2, 2, 3, 0, 1).m == 1);
    CHECK(fit_forest(ds7, 2, 3, 5, 1).m == 5);
}

TEST_CASE("forest prediction is the mean over trees") {
    Dataset ds = rand_dataset(50, 3, 13);
    Forest f = fit_forest(ds, 5, 4, 0, 14);
    Matrix probe(6, 3);
    Rng rng(15);
    for (auto& v : probe.storage()) v = rng.next_double();
    auto agg = predict_baseline(f, probe);
    for (std::size_t i = 0; i < 6; ++i) {
        double mean = 0.0;
        for (const auto& t : f.trees) mean += predict_baseline(t, probe)[i];
        mean /= 5.0;
        CHECK(agg[i] == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("one unbagged full-feature tree equals plain cart") {
    Dataset ds = rand_dataset(70, 3, 16);
    Forest f = fit_forest(ds, 1, 5, 3, 99, 2, false);
    AxisTree plain = fit_cart(ds, 5);
    REQUIRE(f.trees.size() == 1);
    CHECK(same_axis_tree(f.trees[0], plain));
}

TEST_CASE("bagging improves generalization on noisy tree data") {
    SynthSpec spec;
    spec.depth = 3;
    spec.p = 6;
    spec.n = 400;
    spec.noise_sigma = 0.15;
    spec.seed = 17;
    SynthData train = make_oblique_data(spec);
    spec.seed = 18;
    SynthData test = make_oblique_data(spec);
    // Same generating tree is not guaranteed across seeds, so rebuild the
    // test targets from the training tree's predictions plus fresh noise.
    Rng noise(19);
    test.ds.targets = predict(train.tree, test.ds.features);
    for (auto& y : test.ds.targets) y += 0.15 * noise.normal();

    AxisTree deep = fit_cart(train.ds, 12);
    Forest forest = fit_forest(train.ds, 40, 12, 0, 20);
    double tree_err = sse(predict_baseline(deep, test.ds.features), test.ds.targets);
    double forest_err = sse(predict_baseline(forest, test.ds.features), test.ds.targets);
    CHECK(forest_err < tree_err);
}

TEST_CASE("parameter counts: 2 per branch, 1 per leaf, summed over a forest") {
    Dataset ds;
    ds.features = Matrix(4, 1);
    ds.features(0, 0) = 0.0;
    ds.features(1, 0) = 0.25;
    ds.features(2, 0) = 0.75;
    ds.features(3, 0) = 1.0;
    ds.targets = {0.0, 0.1, 0.9, 1.0};
    AxisTree t1 = fit_cart(ds, 1); // 1 branch + 2 leaves
    CHECK(count_parameters(t1) == 2 + 2 * 1);
    AxisTree t2 = fit_cart(ds, 2); // full: 3 branches + 4 leaves
    CHECK(count_parameters(t2) == 3 * 2 + 4 * 1);

    Forest f = fit_forest(ds, 3, 2, 1, 21, 2, false);
    std::size_t total = 0;
    for (const auto& t : f.trees) total += count_parameters(t);
    CHECK(count_parameters(f) == total);
}

TEST_CASE("tree_depth reports the grown depth") {
    Dataset ds;
    ds.features = Matrix(4, 1);
    ds.features(0, 0) = 0.0;
    ds.features(1, 0) = 0.25;
    ds.features(2, 0) = 0.75;
    ds.features(3, 0) = 1.0;
    ds.targets = {0.0, 0.1, 0.9, 1.0};
    CHECK(tree_depth(fit_cart(ds, 1)) == 1);
    CHECK(tree_depth(fit_cart(ds, 2)) == 2);
    CHECK(tree_depth(fit_cart(ds, 9)) == 2); // 4 distinct rows cap at depth 2
}

} // TEST_SUITE
