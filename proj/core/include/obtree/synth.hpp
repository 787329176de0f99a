#ifndef OBTREE_SYNTH_HPP
#define OBTREE_SYNTH_HPP

#include <cstdint>
#include <string>

#include "obtree/dataset.hpp"
#include "obtree/rng.hpp"
#include "obtree/tree.hpp"

namespace obtree {

/// Generator of ground-truth oblique-tree data for tests and benchmarks.
/// Features are drawn uniform on [0,1]^p, so the emitted Dataset needs no
/// further normalization; targets are tree outputs plus Gaussian noise
/// and may spill slightly outside [0,1].
struct SynthSpec {
    int depth = 2;
    std::size_t p = 5;
    std::size_t n = 1000;
    double noise_sigma = 0.0;
    // Rows closer than this to any split hyperplane (|b - a.x| < margin)
    // are rejected and redrawn.
    double margin = 0.0;
    LeafMode leaf_mode = LeafMode::constant;
    std::uint64_t seed = 0;
};

struct SynthData {
    ObliqueTree tree; // the generating tree
    Dataset ds;       // features in [0,1]^p; targets noisy tree outputs
};

/// Random generating tree: unit-norm Gaussian split directions redrawn
/// until no single feature dominates (max |a_j| <= 0.9), thresholds at a
/// random interior point, constant leaves evenly spaced over [0.05, 0.95]
/// in shuffled order (linear mode adds small random slopes). Same seed,
/// same tree.
ObliqueTree make_synth_tree(const SynthSpec& spec, Rng& rng);

/// Feature rows uniform on [0,1]^p, rejecting rows inside the margin of
/// any split of `tree`. Gives up (Error::internal) if acceptance is too
/// rare to fill the matrix.
Matrix sample_features_with_margin(const ObliqueTree& tree, std::size_t n, double margin,
                                   Rng& rng);

/// Tree + features + noisy targets in one call, all from spec.seed.
SynthData make_oblique_data(const SynthSpec& spec);

/// Writes a dataset as CSV (header x1..xp, y) for CLI-driven runs.
void write_csv(const std::string& path, const Dataset& ds);

} // namespace obtree

#endif // OBTREE_SYNTH_HPP
