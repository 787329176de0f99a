#ifndef OBTREE_LEAF_FIT_HPP
#define OBTREE_LEAF_FIT_HPP

#include <cstdint>
#include <vector>

#include "obtree/dataset.hpp"
#include "obtree/tree.hpp"

namespace obtree {

enum class LeafFitKind : std::uint8_t {
    mean,           // constant fit from the leaf's own samples
    least_squares,  // full-rank linear fit
    ridge_fallback, // under-determined or ill-conditioned linear fit
    inherited,      // empty leaf; value from nearest non-empty ancestor subtree
};

struct LeafFitReport {
    std::vector<std::size_t> sample_counts; // per leaf; sums to n
    std::vector<LeafFitKind> kinds;         // per leaf
    Matrix leaf_coeffs;                     // resulting parameters, copied
    std::vector<double> leaf_intercepts;    //   from the updated tree
};

/// Sets each h_t to the mean of y over the samples hard-routed to leaf t;
/// K stays zero. Empty leaves inherit the subtree mean of the nearest
/// ancestor with samples (the root subtree is the whole training set).
/// Tree must be in constant mode. Idempotent; minimizes hard loss over
/// all constant leaf assignments.
LeafFitReport refit_constant(ObliqueTree& tree, const Dataset& ds);

/// Ordinary least squares of y on x per leaf. Degenerate leaves fall
/// back: fewer than p+1 samples or condition proxy >= 1e10 use ridge
/// (1e-8 penalty on k, none on h); fewer than 2 samples use a constant
/// fit; empty leaves inherit as in refit_constant. A candidate fit is
/// adopted only if it does not score worse than the incumbent parameters
/// on that leaf's samples, so refitting never increases hard loss.
/// Tree must be in linear mode.
LeafFitReport refit_linear(ObliqueTree& tree, const Dataset& ds);

/// Dispatches on tree.leaf_mode.
LeafFitReport refit_leaves(ObliqueTree& tree, const Dataset& ds);

} // namespace obtree

#endif // OBTREE_LEAF_FIT_HPP
