#include "obtree/leaf_fit.hpp"

#include <cmath>

#include "obtree/error.hpp"
#include "obtree/linalg.hpp"

namespace obtree {
namespace {

struct Grouping {
    std::vector<std::vector<std::size_t>> members; // per leaf, sample rows
    std::vector<double> node_sum;                  // per node (1-based), subtree target sum
    std::vector<std::size_t> node_count;
};

Grouping group_by_leaf(const ObliqueTree& tree, const Dataset& ds) {
    Grouping g;
    std::size_t leaves = num_leaves(tree.depth);
    std::size_t fl = first_leaf(tree.depth);
    g.members.resize(leaves);
    g.node_sum.assign(num_nodes(tree.depth) + 1, 0.0);
    g.node_count.assign(num_nodes(tree.depth) + 1, 0);
    std::vector<std::size_t> leaf = hard_leaf_assignments(tree, ds.features);
    for (std::size_t i = 0; i < leaf.size(); ++i) {
        g.members[leaf[i]].push_back(i);
        g.node_sum[fl + leaf[i]] += ds.targets[i];
        g.node_count[fl + leaf[i]] += 1;
    }
    for (std::size_t t = num_branch_nodes(tree.depth); t >= 1; --t) {
        g.node_sum[t] = g.node_sum[left_child(t)] + g.node_sum[right_child(t)];
        g.node_count[t] = g.node_count[left_child(t)] + g.node_count[right_child(t)];
    }
    return g;
}

// Mean of the nearest ancestor subtree that has samples. Walks from the
// leaf's own node upward; the root subtree is the full training set.
// Returns false only when the dataset itself is empty.
bool inherited_mean(const Grouping& g, std::size_t node, double& out) {
    for (std::size_t t = node; t >= 1; t = parent(t)) {
        if (g.node_count[t] > 0) {
            out = g.node_sum[t] / static_cast<double>(g.node_count[t]);
            return true;
        }
        if (t == 1) break;
    }
    return false;
}

double leaf_sse(const ObliqueTree& tree, const Dataset& ds, const std::vector<std::size_t>& rows,
                std::size_t li) {
    double sse = 0.0;
    for (std::size_t i : rows) {
        double pred = tree.leaf_intercepts[li];
        if (tree.leaf_mode == LeafMode::linear)
            pred += dot(tree.leaf_coeffs.row(li), ds.features.row(i));
        double r = ds.targets[i] - pred;
        sse += r * r;
    }
    return sse;
}

LeafFitReport finish_report(const ObliqueTree& tree, const Grouping& g,
                            std::vector<LeafFitKind> kinds) {
    LeafFitReport rep;
    rep.kinds = std::move(kinds);
    rep.sample_counts.resize(g.members.size());
    for (std::size_t li = 0; li < g.members.size(); ++li)
        rep.sample_counts[li] = g.members[li].size();
    rep.leaf_coeffs = tree.leaf_coeffs;
    rep.leaf_intercepts = tree.leaf_intercepts;
    return rep;
}

} // namespace

LeafFitReport refit_constant(ObliqueTree& tree, const Dataset& ds) {
    if (tree.leaf_mode != LeafMode::constant)
        throw Error::internal("leaf_fit: refit_constant on a linear-mode tree");
    Grouping g = group_by_leaf(tree, ds);
    std::size_t leaves = num_leaves(tree.depth);
    std::size_t fl = first_leaf(tree.depth);
    std::vector<LeafFitKind> kinds(leaves, LeafFitKind::mean);
    tree.leaf_coeffs.fill(0.0);
    for (std::size_t li = 0; li < leaves; ++li) {
        std::size_t c = g.node_count[fl + li];
        if (c > 0) {
            tree.leaf_intercepts[li] = g.node_sum[fl + li] / static_cast<double>(c);
        } else {
            kinds[li] = LeafFitKind::inherited;
            double m = 0.0;
            if (inherited_mean(g, fl + li, m)) tree.leaf_intercepts[li] = m;
            // Empty dataset: keep the incumbent value.
        }
    }
    return finish_report(tree, g, std::move(kinds));
}

LeafFitReport refit_linear(ObliqueTree& tree, const Dataset& ds) {
    if (tree.leaf_mode != LeafMode::linear)
        throw Error::internal("leaf_fit: refit_linear on a constant-mode tree");
    Grouping g = group_by_leaf(tree, ds);
    std::size_t leaves = num_leaves(tree.depth);
    std::size_t fl = first_leaf(tree.depth);
    std::size_t p = tree.p;
    std::vector<LeafFitKind> kinds(leaves, LeafFitKind::least_squares);

    for (std::size_t li = 0; li < leaves; ++li) {
        const std::vector<std::size_t>& rows = g.members[li];
        std::size_t c = rows.size();
        if (c == 0) {
            kinds[li] = LeafFitKind::inherited;
            double m = 0.0;
            if (inherited_mean(g, fl + li, m)) {
                tree.leaf_intercepts[li] = m;
                for (std::size_t j = 0; j < p; ++j) tree.leaf_coeffs(li, j) = 0.0;
            }
            continue;
        }
        if (c == 1) {
            kinds[li] = LeafFitKind::mean; // constant fallback: exact fit
            tree.leaf_intercepts[li] = ds.targets[rows[0]];
            for (std::size_t j = 0; j < p; ++j) tree.leaf_coeffs(li, j) = 0.0;
            continue;
        }

        // Design matrix [X | 1] against y over the leaf's rows.
        Matrix A(c, p + 1);
        std::vector<double> b(c);
        for (std::size_t r = 0; r < c; ++r) {
            for (std::size_t j = 0; j < p; ++j) A(r, j) = ds.features(rows[r], j);
            A(r, p) = 1.0;
            b[r] = ds.targets[rows[r]];
        }
        std::vector<double> cand;
        if (c >= p + 1) {
            LstsqResult res = qr_least_squares(A, b, 1e10);
            if (res.full_rank) {
                cand = std::move(res.x);
            }
        }
        if (cand.empty()) { // under-determined or ill-conditioned
            kinds[li] = LeafFitKind::ridge_fallback;
            std::vector<double> penalty(p + 1, 1e-8);
            penalty[p] = 0.0; // intercept unpenalized
            cand = ridge_least_squares(A, b, penalty);
        }

        // Adopt the candidate only if it does not score worse than the
        // incumbent parameters on this leaf's own samples; ridge especially
        // is not the SSE minimizer, and refit must never increase hard loss.
        double sse_inc = leaf_sse(tree, ds, rows, li);
        ObliqueTree& t = tree;
        double sse_cand = 0.0;
        for (std::size_t r = 0; r < c; ++r) {
            double pred = cand[p];
            for (std::size_t j = 0; j < p; ++j) pred += cand[j] * A(r, j);
            double d = b[r] - pred;
            sse_cand += d * d;
        }
        bool adopt = std::isfinite(sse_cand) && !(sse_cand > sse_inc);
        if (!std::isfinite(sse_inc)) adopt = std::isfinite(sse_cand);
        if (adopt) {
            for (std::size_t j = 0; j < p; ++j) t.leaf_coeffs(li, j) = cand[j];
            t.leaf_intercepts[li] = cand[p];
        }
    }
    return finish_report(tree, g, std::move(kinds));
}

LeafFitReport refit_leaves(ObliqueTree& tree, const Dataset& ds) {
    return tree.leaf_mode == LeafMode::constant ? refit_constant(tree, ds)
                                                : refit_linear(tree, ds);
}

} // namespace obtree
