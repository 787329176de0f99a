#include "obtree/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <thread>

#include "obtree/error.hpp"
#include "obtree/rng.hpp"

namespace obtree {
namespace {

struct BestSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double child_sse = 0.0;
};

struct Candidate {
    std::size_t feature;
    double threshold;
    double prefix_sse;
};

// Exhaustive scan of one feature: thresholds are midpoints between
// consecutive sorted unique values; child SSE via prefix sums (fast but
// subject to ~n*eps cancellation noise). Candidates are appended in
// ascending threshold order; `best` tracks the prefix-score minimum.
void scan_feature(const Dataset& ds, const std::vector<std::size_t>& rows, std::size_t feature,
                  std::vector<std::size_t>& order, std::vector<Candidate>& cands,
                  BestSplit& best) {
    std::size_t c = rows.size();
    order.resize(c);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.features(rows[a], feature) < ds.features(rows[b], feature);
    });

    double total_sum = 0.0, total_sq = 0.0;
    for (std::size_t i : rows) {
        total_sum += ds.targets[i];
        total_sq += ds.targets[i] * ds.targets[i];
    }

    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t k = 0; k + 1 < c; ++k) {
        double y = ds.targets[rows[order[k]]];
        left_sum += y;
        left_sq += y * y;
        double xv = ds.features(rows[order[k]], feature);
        double xn = ds.features(rows[order[k + 1]], feature);
        if (!(xn > xv)) continue; // duplicate value, not a boundary
        double nl = static_cast<double>(k + 1);
        double nr = static_cast<double>(c - k - 1);
        double right_sum = total_sum - left_sum;
        double right_sq = total_sq - left_sq;
        double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        cands.push_back({feature, 0.5 * (xv + xn), sse});
        if (!best.found || sse < best.child_sse) {
            best.found = true;
            best.feature = feature;
            best.threshold = 0.5 * (xv + xn);
            best.child_sse = sse;
        }
    }
}

// Canonical split score: per side, mean first, centered squares second,
// both accumulated in row order. Any direct implementation of summed
// child SSE over the same rows computes these exact bits, so ties rank
// the same everywhere; the prefix form above does not have that property.
double centered_split_sse(const Dataset& ds, const std::vector<std::size_t>& rows,
                          std::size_t feature, double threshold) {
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t r : rows) {
        int side = ds.features(r, feature) <= threshold ? 0 : 1;
        sum[side] += ds.targets[r];
        ++count[side];
    }
    double mean[2];
    for (int s = 0; s < 2; ++s) mean[s] = count[s] == 0 ? 0.0 : sum[s] / static_cast<double>(count[s]);
    double sse[2] = {0.0, 0.0};
    for (std::size_t r : rows) {
        int side = ds.features(r, feature) <= threshold ? 0 : 1;
        double d = ds.targets[r] - mean[side];
        sse[side] += d * d;
    }
    return sse[0] + sse[1];
}

// Final selection: candidates within a noise window of the prefix-score
// minimum are re-scored canonically and the first strict minimum in
// (feature, threshold) order wins. The window is wide enough that the
// canonical optimum can never hide outside it, so the chosen split is the
// exact argmin of the canonical score with deterministic tie-breaks.
BestSplit select_candidate(const Dataset& ds, const std::vector<std::size_t>& rows,
                           const std::vector<Candidate>& cands, const BestSplit& prefix_best,
                           double node_sq) {
    double tol = 1e-6 * std::max(1.0, node_sq);
    double window = prefix_best.child_sse + tol;
    BestSplit out;
    for (const Candidate& c : cands) {
        if (c.prefix_sse > window) continue;
        double exact = centered_split_sse(ds, rows, c.feature, c.threshold);
        if (!out.found || exact < out.child_sse) {
            out.found = true;
            out.feature = c.feature;
            out.threshold = c.threshold;
            out.child_sse = exact;
        }
    }
    return out;
}

double mean_of(const Dataset& ds, const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (std::size_t i : rows) s += ds.targets[i];
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

bool constant_targets(const Dataset& ds, const std::vector<std::size_t>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (ds.targets[rows[i]] != ds.targets[rows[0]]) return false;
    return true;
}

struct GrowContext {
    const Dataset& ds;
    AxisTree& tree;
    int max_depth;
    int min_samples_split;
    Rng* rng = nullptr;     // feature subsampling when set
    std::size_t m = 0;      // features per split (0 = all)
    std::vector<std::size_t> scratch_order;
    std::vector<std::size_t> feature_pool;
    std::vector<Candidate> scratch_cands;
};

int grow(GrowContext& ctx, std::vector<std::size_t>& rows, int depth) {
    int node_id = static_cast<int>(ctx.tree.nodes.size());
    ctx.tree.nodes.push_back(AxisTree::Node{});
    ctx.tree.nodes.back().value = mean_of(ctx.ds, rows);

    if (depth >= ctx.max_depth || rows.size() < static_cast<std::size_t>(ctx.min_samples_split) ||
        constant_targets(ctx.ds, rows))
        return node_id;

    std::size_t p = ctx.ds.num_features();
    BestSplit prefix_best;
    ctx.scratch_cands.clear();
    if (ctx.rng != nullptr && ctx.m < p) {
        // Partial Fisher-Yates: first m entries become the drawn features,
        // without replacement, in draw order.
        ctx.feature_pool.resize(p);
        std::iota(ctx.feature_pool.begin(), ctx.feature_pool.end(), std::size_t{0});
        for (std::size_t k = 0; k < ctx.m; ++k) {
            std::size_t j = k + static_cast<std::size_t>(ctx.rng->below(p - k));
            std::swap(ctx.feature_pool[k], ctx.feature_pool[j]);
        }
        std::vector<std::size_t> chosen(ctx.feature_pool.begin(),
                                        ctx.feature_pool.begin() +
                                            static_cast<std::ptrdiff_t>(ctx.m));
        std::sort(chosen.begin(), chosen.end()); // scan order stays by feature index
        for (std::size_t f : chosen)
            scan_feature(ctx.ds, rows, f, ctx.scratch_order, ctx.scratch_cands, prefix_best);
    } else {
        for (std::size_t f = 0; f < p; ++f)
            scan_feature(ctx.ds, rows, f, ctx.scratch_order, ctx.scratch_cands, prefix_best);
    }
    if (!prefix_best.found) return node_id;

    double node_sq = 0.0;
    for (std::size_t i : rows) node_sq += ctx.ds.targets[i] * ctx.ds.targets[i];
    BestSplit best = select_candidate(ctx.ds, rows, ctx.scratch_cands, prefix_best, node_sq);

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t i : rows) {
        if (ctx.ds.features(i, best.feature) <= best.threshold)
            left_rows.push_back(i);
        else
            right_rows.push_back(i);
    }
    if (left_rows.empty() || right_rows.empty()) return node_id; // defensive; midpoints forbid it
    rows.clear();
    rows.shrink_to_fit();

    int left_id = grow(ctx, left_rows, depth + 1);
    int right_id = grow(ctx, right_rows, depth + 1);
    AxisTree::Node& node = ctx.tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
}

double predict_one(const AxisTree& tree, std::span<const double> x) {
    int at = 0;
    while (tree.nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const AxisTree::Node& nd = tree.nodes[static_cast<std::size_t>(at)];
        at = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(at)].value;
}

AxisTree fit_cart_sampled(const Dataset& ds, const std::vector<std::size_t>& rows, int max_depth,
                          int min_samples_split, Rng* rng, std::size_t m) {
    AxisTree tree;
    tree.max_depth = max_depth;
    tree.min_samples_split = min_samples_split;
    GrowContext ctx{ds, tree, max_depth, min_samples_split, rng, m, {}, {}};
    std::vector<std::size_t> all = rows;
    grow(ctx, all, 0);
    return tree;
}

} // namespace

AxisTree fit_cart(const Dataset& ds, int max_depth, int min_samples_split) {
    if (max_depth < 1) throw Error::user("cart: max_depth must be >= 1");
    if (min_samples_split < 2) throw Error::user("cart: min_samples_split must be >= 2");
    if (ds.size() == 0) throw Error::user("cart: empty dataset");
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_cart_sampled(ds, rows, max_depth, min_samples_split, nullptr, 0);
}

Forest fit_forest(const Dataset& ds, int n_trees, int max_depth, std::size_t m, std::uint64_t seed,
                  int min_samples_split, bool bootstrap, int threads) {
    if (n_trees < 1) throw Error::user("forest: n_trees must be >= 1");
    if (max_depth < 1) throw Error::user("forest: max_depth must be >= 1");
    if (ds.size() == 0) throw Error::user("forest: empty dataset");
    std::size_t p = ds.num_features();
    Forest forest;
    forest.m = m == 0 ? std::max<std::size_t>(1, p / 3) : std::min(m, p);
    forest.bootstrap = bootstrap;
    forest.trees.resize(static_cast<std::size_t>(n_trees));
    forest.tree_seeds.resize(static_cast<std::size_t>(n_trees));
    for (int s = 0; s < n_trees; ++s)
        forest.tree_seeds[static_cast<std::size_t>(s)] =
            derive_seed(seed, static_cast<std::uint64_t>(s));

    auto build = [&](int s) {
        Rng rng(forest.tree_seeds[static_cast<std::size_t>(s)]);
        std::vector<std::size_t> rows(ds.size());
        if (bootstrap) {
            for (std::size_t i = 0; i < ds.size(); ++i)
                rows[i] = static_cast<std::size_t>(rng.below(ds.size()));
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        forest.trees[static_cast<std::size_t>(s)] =
            fit_cart_sampled(ds, rows, max_depth, min_samples_split, &rng, forest.m);
    };
    if (threads <= 1 || n_trees == 1) {
        for (int s = 0; s < n_trees; ++s) build(s);
    } else {
        std::atomic<int> next{0};
        auto body = [&] {
            for (int s = next.fetch_add(1); s < n_trees; s = next.fetch_add(1)) build(s);
        };
        int workers = std::min(threads, n_trees);
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    return forest;
}

std::vector<double> predict_baseline(const AxisTree& tree, const Matrix& X) {
    if (tree.empty()) throw Error::internal("cart: predicting with an unfit tree");
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_one(tree, X.row(i));
    return out;
}

std::vector<double> predict_baseline(const Forest& forest, const Matrix& X) {
    if (forest.trees.empty()) throw Error::internal("forest: predicting with an unfit forest");
    std::vector<double> out(X.rows(), 0.0);
    for (const AxisTree& tree : forest.trees)
        for (std::size_t i = 0; i < X.rows(); ++i) out[i] += predict_one(tree, X.row(i));
    double inv = 1.0 / static_cast<double>(forest.trees.size());
    for (double& v : out) v *= inv;
    return out;
}

std::size_t count_parameters(const AxisTree& tree) {
    std::size_t branches = 0, leaves = 0;
    for (const auto& nd : tree.nodes) (nd.feature >= 0 ? branches : leaves) += 1;
    return 2 * branches + leaves;
}

std::size_t count_parameters(const Forest& forest) {
    std::size_t total = 0;
    for (const AxisTree& t : forest.trees) total += count_parameters(t);
    return total;
}

int tree_depth(const AxisTree& tree) {
    if (tree.empty()) return 0;
    // Iterative depth over the pool: depth of node = parent's + 1.
    std::vector<int> depth(tree.nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& nd = tree.nodes[i];
        if (nd.feature < 0) {
            deepest = std::max(deepest, depth[i]);
            continue;
        }
        depth[static_cast<std::size_t>(nd.left)] = depth[i] + 1;
        depth[static_cast<std::size_t>(nd.right)] = depth[i] + 1;
    }
    return deepest;
}

} // namespace obtree
