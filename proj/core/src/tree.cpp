#include "obtree/tree.hpp"

#include <algorithm>

#include "obtree/error.hpp"

namespace obtree {

ObliqueTree make_tree(int depth, std::size_t p, LeafMode mode) {
    if (depth < 1) throw Error::user("tree: depth must be >= 1");
    if (p < 1) throw Error::user("tree: need at least one feature");
    ObliqueTree t;
    t.depth = depth;
    t.p = p;
    t.leaf_mode = mode;
    t.split_weights = Matrix(num_branch_nodes(depth), p);
    t.split_thresholds.assign(num_branch_nodes(depth), 0.0);
    t.leaf_coeffs = Matrix(num_leaves(depth), p);
    t.leaf_intercepts.assign(num_leaves(depth), 0.0);
    return t;
}

std::vector<AncestorSets> ancestor_sets(int depth) {
    if (depth < 1) throw Error::user("tree: depth must be >= 1");
    std::size_t leaves = num_leaves(depth);
    std::vector<AncestorSets> sets(leaves);
    for (std::size_t li = 0; li < leaves; ++li) {
        std::size_t node = first_leaf(depth) + li;
        AncestorSets& s = sets[li];
        // Walk up; a left edge means node == 2 * parent.
        for (std::size_t t = node; t > 1; t = parent(t)) {
            if (t % 2 == 0)
                s.left.push_back(parent(t));
            else
                s.right.push_back(parent(t));
        }
        // Root-down order.
        std::reverse(s.left.begin(), s.left.end());
        std::reverse(s.right.begin(), s.right.end());
    }
    return sets;
}

std::vector<std::size_t> hard_leaf_assignments(const ObliqueTree& tree, const Matrix& X) {
    if (X.cols() != tree.p) throw Error::user("tree: feature count mismatch");
    std::size_t n = X.rows();
    std::vector<std::size_t> leaf(n);
    std::size_t fl = first_leaf(tree.depth);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = X.row(i);
        std::size_t t = 1;
        while (t < fl) {
            double z = tree.split_thresholds[t - 1] - dot(tree.split_weights.row(t - 1), x);
            t = z > 0.0 ? left_child(t) : right_child(t); // equality routes right
        }
        leaf[i] = t - fl;
    }
    return leaf;
}

RoutingMatrix hard_route(const ObliqueTree& tree, const Matrix& X) {
    if (X.cols() != tree.p) throw Error::user("tree: feature count mismatch");
    std::size_t n = X.rows();
    std::size_t leaves = num_leaves(tree.depth);
    RoutingMatrix r;
    r.mode = RoutingMode::hard;
    r.n = n;
    r.leaves = leaves;
    r.weights.assign(n * leaves, 0.0);
    // Indicator product over each leaf's ancestor sets; written as the
    // product form rather than a descent so it matches the definition the
    // relaxation approximates.
    auto sets = ancestor_sets(tree.depth);
    std::vector<double> ind(num_branch_nodes(tree.depth));
    for (std::size_t i = 0; i < n; ++i) {
        auto x = X.row(i);
        for (std::size_t b = 0; b < ind.size(); ++b) {
            double z = tree.split_thresholds[b] - dot(tree.split_weights.row(b), x);
            ind[b] = z > 0.0 ? 1.0 : 0.0;
        }
        for (std::size_t li = 0; li < leaves; ++li) {
            double prod = 1.0;
            for (std::size_t a : sets[li].left) prod *= ind[a - 1];
            for (std::size_t a : sets[li].right) prod *= 1.0 - ind[a - 1];
            r.weights[i * leaves + li] = prod;
        }
    }
    return r;
}

std::vector<double> predict(const ObliqueTree& tree, const Matrix& X) {
    std::vector<std::size_t> leaf = hard_leaf_assignments(tree, X);
    std::vector<double> yhat(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double v = tree.leaf_intercepts[leaf[i]];
        if (tree.leaf_mode == LeafMode::linear) v += dot(tree.leaf_coeffs.row(leaf[i]), X.row(i));
        yhat[i] = v;
    }
    return yhat;
}

double hard_loss(const ObliqueTree& tree, const Matrix& X, const std::vector<double>& y) {
    if (X.rows() != y.size()) throw Error::user("tree: feature/target row mismatch");
    std::vector<double> yhat = predict(tree, X);
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double r = y[i] - yhat[i];
        sse += r * r;
    }
    return sse;
}

ParameterCounts count_parameters(int depth, std::size_t p, LeafMode mode) {
    ParameterCounts c;
    c.branch_params = num_branch_nodes(depth) * (p + 1);
    c.leaf_params = num_leaves(depth) * (mode == LeafMode::linear ? p + 1 : 1);
    c.total = c.branch_params + c.leaf_params;
    return c;
}

ParameterCounts count_parameters(const ObliqueTree& tree) {
    return count_parameters(tree.depth, tree.p, tree.leaf_mode);
}

} // namespace obtree
