#ifndef OBTREE_POLISH_HPP
#define OBTREE_POLISH_HPP

#include <string>
#include <vector>

#include "obtree/dataset.hpp"
#include "obtree/train.hpp"
#include "obtree/tree.hpp"

namespace obtree {

struct PolishConfig {
    // Subtree fits reuse the outer TrainConfig with n_start and n_epoch
    // scaled by this factor (minimum 1 each).
    double budget_scale = 0.5;
    // "Improves" means the full-tree hard loss drops by more than this.
    double improvement_tol = 1e-12;
};

struct PolishEntry {
    std::size_t node = 0;        // branch node index
    std::size_t subset_size = 0; // samples reaching the node
    bool skipped = false;
    std::string skip_reason;     // empty unless skipped
    double pre_loss = 0.0;       // full-tree hard loss before the step
    double post_loss = 0.0;      // ... after (== pre_loss when rejected/skipped)
    bool accepted = false;
};

struct PolishReport {
    std::vector<PolishEntry> entries; // one per branch node, ascending index
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Indices of the samples whose hard route passes through branch node t.
/// For t = 1 this is every row.
std::vector<std::size_t> node_subset(const ObliqueTree& tree, const Dataset& ds, std::size_t t);

/// Copies the subtree rooted at branch node t into a standalone tree of
/// depth D - level(t).
ObliqueTree extract_subtree(const ObliqueTree& tree, std::size_t t);

/// Writes a standalone subtree back over the subtree rooted at t.
void splice_subtree(ObliqueTree& tree, std::size_t t, const ObliqueTree& sub);

/// One ascending pass over all branch nodes: each eligible node
/// (subset size > 1 and more than one distinct target) gets its subtree
/// re-optimized on the samples reaching it, warm-started from the current
/// parameters; the result is spliced into a copy, leaves are refit, and
/// the copy replaces the tree only when full-tree hard loss strictly
/// improves (beyond the tolerance). Rejected steps leave the tree bitwise
/// untouched; a final tree-wide leaf refit closes the pass. Subtree fit
/// failures skip the node with the reason recorded.
PolishReport polish(ObliqueTree& tree, const Dataset& ds, const TrainConfig& outer,
                    const PolishConfig& cfg = {});

} // namespace obtree

#endif // OBTREE_POLISH_HPP
