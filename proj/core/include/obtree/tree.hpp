#ifndef OBTREE_TREE_HPP
#define OBTREE_TREE_HPP

#include <cstdint>
#include <vector>

#include "obtree/matrix.hpp"

namespace obtree {

enum class LeafMode : std::uint8_t {
    constant, // leaf prediction h_t
    linear,   // leaf prediction k_t . x + h_t
};

// Nodes are numbered 1..T breadth-first over a complete binary tree of
// depth D, T = 2^(D+1) - 1. Node t's children are 2t and 2t+1; branch
// nodes are 1..2^D - 1 and leaves 2^D..T. Index 0 is never a node.
inline std::size_t num_nodes(int depth) { return (std::size_t{2} << depth) - 1; }
inline std::size_t num_branch_nodes(int depth) { return (std::size_t{1} << depth) - 1; }
inline std::size_t num_leaves(int depth) { return std::size_t{1} << depth; }
inline std::size_t first_leaf(int depth) { return std::size_t{1} << depth; }
inline std::size_t left_child(std::size_t t) { return 2 * t; }
inline std::size_t right_child(std::size_t t) { return 2 * t + 1; }
inline std::size_t parent(std::size_t t) { return t / 2; }

/// A complete oblique tree of fixed depth. Branch node t holds the
/// hyperplane (a_t, b_t) at branch row t-1; a sample goes left when
/// b_t - a_t . x > 0 and right otherwise (equality routes right). Leaf t
/// holds (k_t, h_t) at leaf row t - 2^D; constant mode keeps every k_t at
/// exactly zero.
struct ObliqueTree {
    int depth = 1;
    std::size_t p = 0;
    LeafMode leaf_mode = LeafMode::constant;
    Matrix split_weights;                 // (2^D - 1) x p, row i = a_{i+1}
    std::vector<double> split_thresholds; // b, length 2^D - 1
    Matrix leaf_coeffs;                   // 2^D x p, row j = k_{2^D + j}
    std::vector<double> leaf_intercepts;  // h, length 2^D

    std::size_t branch_count() const { return split_thresholds.size(); }
    std::size_t leaf_count() const { return leaf_intercepts.size(); }
};

/// Allocates a tree of the given shape with all parameters zero.
ObliqueTree make_tree(int depth, std::size_t p, LeafMode mode);

/// Left/right ancestor sets for one leaf: the branch nodes whose left
/// (resp. right) edge lies on the root-to-leaf path, ordered root-down.
struct AncestorSets {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
};

/// Ancestor sets for every leaf, ordered 2^D..T.
std::vector<AncestorSets> ancestor_sets(int depth);

enum class RoutingMode : std::uint8_t { hard, soft };

/// Sample-to-leaf assignment weights. Hard rows hold exactly one 1.0;
/// soft rows sum to 1 within rounding.
struct RoutingMatrix {
    RoutingMode mode = RoutingMode::hard;
    std::size_t n = 0;
    std::size_t leaves = 0;
    std::vector<double> weights; // n x leaves, row-major

    double at(std::size_t i, std::size_t leaf) const { return weights[i * leaves + leaf]; }
};

/// Routes every sample by the indicator product over its ancestor sets,
/// I = 1(b - a.x > 0). Exactly one leaf per row gets weight 1.
RoutingMatrix hard_route(const ObliqueTree& tree, const Matrix& X);

/// Leaf row (node - 2^D) each sample lands in under hard routing.
std::vector<std::size_t> hard_leaf_assignments(const ObliqueTree& tree, const Matrix& X);

/// Hard predictions: the landed leaf's affine output per sample.
std::vector<double> predict(const ObliqueTree& tree, const Matrix& X);

/// Sum of squared residuals under hard routing. No penalty terms; this is
/// the quantity all candidate comparisons use.
double hard_loss(const ObliqueTree& tree, const Matrix& X, const std::vector<double>& y);

/// Trainable-parameter totals for one tree shape.
struct ParameterCounts {
    std::size_t branch_params = 0; // (p + 1) per branch node
    std::size_t leaf_params = 0;   // 1 per leaf, or p + 1 in linear mode
    std::size_t total = 0;
};

ParameterCounts count_parameters(int depth, std::size_t p, LeafMode mode);
ParameterCounts count_parameters(const ObliqueTree& tree);

} // namespace obtree

#endif // OBTREE_TREE_HPP
