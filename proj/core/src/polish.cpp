#include "obtree/polish.hpp"

#include <algorithm>
#include <cmath>

#include "obtree/error.hpp"
#include "obtree/leaf_fit.hpp"

namespace obtree {
namespace {

// Level of node t in the 1-based breadth-first numbering (root = 0).
int node_level(std::size_t t) {
    int lvl = 0;
    while (t > 1) {
        t = parent(t);
        ++lvl;
    }
    return lvl;
}

// Count of distinct values; exact equality is intended, targets being
// finite 64-bit values.
bool more_than_one_distinct(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return a != b; }) !=
           v.end();
}

} // namespace

std::vector<std::size_t> node_subset(const ObliqueTree& tree, const Dataset& ds, std::size_t t) {
    if (t < 1 || t > num_branch_nodes(tree.depth))
        throw Error::internal("polish: node index out of branch range");
    // Root-to-t path; a sample reaches t iff every ancestor routes it
    // toward t.
    std::vector<std::size_t> path;
    for (std::size_t x = t; x >= 1; x = parent(x)) {
        path.push_back(x);
        if (x == 1) break;
    }
    std::reverse(path.begin(), path.end());

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto x = ds.features.row(i);
        bool reaches = true;
        for (std::size_t step = 0; step + 1 < path.size(); ++step) {
            std::size_t anc = path[step];
            bool toward_left = path[step + 1] == left_child(anc);
            double z = tree.split_thresholds[anc - 1] - dot(tree.split_weights.row(anc - 1), x);
            if ((z > 0.0) != toward_left) {
                reaches = false;
                break;
            }
        }
        if (reaches) rows.push_back(i);
    }
    return rows;
}

ObliqueTree extract_subtree(const ObliqueTree& tree, std::size_t t) {
    int level = node_level(t);
    int sub_depth = tree.depth - level;
    if (sub_depth < 1) throw Error::internal("polish: subtree at a leaf");
    ObliqueTree sub = make_tree(sub_depth, tree.p, tree.leaf_mode);
    // Breadth-first copy: subtree node s maps to full-tree node
    // t * 2^level(s) + offset(s).
    for (std::size_t s = 1; s <= num_nodes(sub_depth); ++s) {
        int slvl = node_level(s);
        std::size_t base = std::size_t{1} << slvl;
        std::size_t full = (t << slvl) + (s - base);
        if (s < first_leaf(sub_depth)) {
            for (std::size_t j = 0; j < tree.p; ++j)
                sub.split_weights(s - 1, j) = tree.split_weights(full - 1, j);
            sub.split_thresholds[s - 1] = tree.split_thresholds[full - 1];
        } else {
            std::size_t sub_li = s - first_leaf(sub_depth);
            std::size_t full_li = full - first_leaf(tree.depth);
            for (std::size_t j = 0; j < tree.p; ++j)
                sub.leaf_coeffs(sub_li, j) = tree.leaf_coeffs(full_li, j);
            sub.leaf_intercepts[sub_li] = tree.leaf_intercepts[full_li];
        }
    }
    return sub;
}

void splice_subtree(ObliqueTree& tree, std::size_t t, const ObliqueTree& sub) {
    int level = node_level(t);
    if (sub.depth != tree.depth - level || sub.p != tree.p || sub.leaf_mode != tree.leaf_mode)
        throw Error::internal("polish: splice shape mismatch");
    for (std::size_t s = 1; s <= num_nodes(sub.depth); ++s) {
        int slvl = node_level(s);
        std::size_t base = std::size_t{1} << slvl;
        std::size_t full = (t << slvl) + (s - base);
        if (s < first_leaf(sub.depth)) {
            for (std::size_t j = 0; j < tree.p; ++j)
                tree.split_weights(full - 1, j) = sub.split_weights(s - 1, j);
            tree.split_thresholds[full - 1] = sub.split_thresholds[s - 1];
        } else {
            std::size_t sub_li = s - first_leaf(sub.depth);
            std::size_t full_li = full - first_leaf(tree.depth);
            for (std::size_t j = 0; j < tree.p; ++j)
                tree.leaf_coeffs(full_li, j) = sub.leaf_coeffs(sub_li, j);
            tree.leaf_intercepts[full_li] = sub.leaf_intercepts[sub_li];
        }
    }
}

PolishReport polish(ObliqueTree& tree, const Dataset& ds, const TrainConfig& outer,
                    const PolishConfig& cfg) {
    outer.validate();
    PolishReport report;
    report.initial_loss = hard_loss(tree, ds.features, ds.targets);
    double current = report.initial_loss;

    for (std::size_t t = 1; t <= num_branch_nodes(tree.depth); ++t) {
        PolishEntry entry;
        entry.node = t;
        entry.pre_loss = current;
        entry.post_loss = current;

        std::vector<std::size_t> rows = node_subset(tree, ds, t);
        entry.subset_size = rows.size();
        if (rows.size() <= 1) {
            entry.skipped = true;
            entry.skip_reason = "subset too small";
            report.entries.push_back(std::move(entry));
            continue;
        }
        std::vector<double> yt(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) yt[i] = ds.targets[rows[i]];
        if (!more_than_one_distinct(yt)) {
            entry.skipped = true;
            entry.skip_reason = "constant targets";
            report.entries.push_back(std::move(entry));
            continue;
        }

        TrainConfig inner = outer;
        inner.depth = tree.depth - node_level(t);
        inner.n_start = std::max(1, static_cast<int>(std::llround(
                                        static_cast<double>(outer.n_start) * cfg.budget_scale)));
        inner.n_epoch = std::max(1, static_cast<int>(std::llround(
                                        static_cast<double>(outer.n_epoch) * cfg.budget_scale)));
        inner.seed = derive_seed(outer.seed, 0x9000 + t);

        ObliqueTree warm = extract_subtree(tree, t);
        Dataset sub_ds = subset(ds, rows);
        ObliqueTree candidate_full = tree;
        try {
            FitResult inner_fit = fit(sub_ds, inner, &warm);
            splice_subtree(candidate_full, t, inner_fit.tree);
        } catch (const std::exception& e) {
            entry.skipped = true;
            entry.skip_reason = std::string("subtree fit failed: ") + e.what();
            report.entries.push_back(std::move(entry));
            continue;
        }
        refit_leaves(candidate_full, ds);
        double cand_loss = hard_loss(candidate_full, ds.features, ds.targets);
        if (cand_loss < current - cfg.improvement_tol) {
            tree = std::move(candidate_full);
            current = cand_loss;
            entry.accepted = true;
            entry.post_loss = cand_loss;
        }
        report.entries.push_back(std::move(entry));
    }

    refit_leaves(tree, ds);
    report.final_loss = hard_loss(tree, ds.features, ds.targets);
    return report;
}

} // namespace obtree
