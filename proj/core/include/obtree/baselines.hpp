#ifndef OBTREE_BASELINES_HPP
#define OBTREE_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "obtree/dataset.hpp"
#include "obtree/matrix.hpp"
#include "obtree/tree.hpp"

namespace obtree {

/// Greedy axis-aligned regression tree, stored as a flat node pool.
/// Node 0 is the root; leaves have feature == -1.
struct AxisTree {
    struct Node {
        int feature = -1;      // -1 marks a leaf
        double threshold = 0.0;
        double value = 0.0;    // leaf prediction (mean of its samples)
        int left = -1;         // pool indices; -1 on leaves
        int right = -1;
    };
    std::vector<Node> nodes;
    int max_depth = 1;
    int min_samples_split = 2;

    bool empty() const { return nodes.empty(); }
};

struct Forest {
    std::vector<AxisTree> trees;
    std::vector<std::uint64_t> tree_seeds; // per-tree bootstrap/feature seeds
    std::size_t m = 0;                     // features considered per split
    bool bootstrap = true;
};

/// Grows a CART tree by exhaustive search: at every node, candidate
/// thresholds are the midpoints between consecutive sorted unique values
/// of each feature; the split minimizing the summed child SSE wins, ties
/// broken by lowest feature index then lowest threshold (strict-<
/// acceptance during the scan). Recursion stops at max_depth, below
/// min_samples_split, or on constant targets. Leaves predict the sample
/// mean. Errors (Error::user) on max_depth < 1 or empty data.
AxisTree fit_cart(const Dataset& ds, int max_depth, int min_samples_split = 2);

/// Bags n_trees CART trees: each trains on an n-row bootstrap (with
/// replacement; switchable off) and considers m features drawn uniformly
/// without replacement per split. m == 0 selects the regression default
/// max(1, p/3). Tree s seeds from derive_seed(seed, s).
Forest fit_forest(const Dataset& ds, int n_trees, int max_depth, std::size_t m,
                  std::uint64_t seed, int min_samples_split = 2, bool bootstrap = true,
                  int threads = 1);

std::vector<double> predict_baseline(const AxisTree& tree, const Matrix& X);
std::vector<double> predict_baseline(const Forest& forest, const Matrix& X);

/// Parameter accounting for the benchmark report: 2 per branch node
/// (feature index + threshold) and 1 per leaf.
std::size_t count_parameters(const AxisTree& tree);
std::size_t count_parameters(const Forest& forest);

/// Depth of the grown tree (root-only = 0); never exceeds max_depth.
int tree_depth(const AxisTree& tree);

} // namespace obtree

#endif // OBTREE_BASELINES_HPP
