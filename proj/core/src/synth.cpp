#include "obtree/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "obtree/error.hpp"

namespace obtree {

ObliqueTree make_synth_tree(const SynthSpec& spec, Rng& rng) {
    ObliqueTree tree = make_tree(spec.depth, spec.p, spec.leaf_mode);
    for (std::size_t b = 0; b < tree.branch_count(); ++b) {
        // Genuinely oblique directions: reject near-axis-aligned draws.
        while (true) {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < spec.p; ++j) {
                double v = rng.normal();
                tree.split_weights(b, j) = v;
                norm2 += v * v;
            }
            if (norm2 == 0.0) continue;
            double inv = 1.0 / std::sqrt(norm2);
            double amax = 0.0;
            for (std::size_t j = 0; j < spec.p; ++j) {
                tree.split_weights(b, j) *= inv;
                amax = std::max(amax, std::abs(tree.split_weights(b, j)));
            }
            if (spec.p == 1 || amax <= 0.9) break;
        }
        // Threshold at the split value of a random interior point, keeping
        // both sides of every hyperplane populated in expectation.
        double z = 0.0;
        for (std::size_t j = 0; j < spec.p; ++j)
            z += tree.split_weights(b, j) * rng.uniform(0.25, 0.75);
        tree.split_thresholds[b] = z;
    }
    // Leaf levels evenly spaced then shuffled: neighbouring leaves get
    // well-separated values, which keeps axis-aligned approximations
    // visibly worse than the generating tree.
    std::size_t leaves = tree.leaf_count();
    std::vector<double> levels(leaves);
    for (std::size_t li = 0; li < leaves; ++li)
        levels[li] = leaves == 1 ? 0.5
                                 : 0.05 + 0.9 * static_cast<double>(li) /
                                              static_cast<double>(leaves - 1);
    for (std::size_t i = leaves - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(levels[i], levels[j]);
    }
    for (std::size_t li = 0; li < leaves; ++li) {
        tree.leaf_intercepts[li] = levels[li];
        if (spec.leaf_mode == LeafMode::linear)
            for (std::size_t j = 0; j < spec.p; ++j)
                tree.leaf_coeffs(li, j) = rng.uniform(-0.3, 0.3) / static_cast<double>(spec.p);
    }
    return tree;
}

Matrix sample_features_with_margin(const ObliqueTree& tree, std::size_t n, double margin,
                                   Rng& rng) {
    Matrix X(n, tree.p);
    std::vector<double> x(tree.p);
    std::size_t attempts_left = 1000 * n + 1000;
    for (std::size_t i = 0; i < n; ++i) {
        while (true) {
            if (attempts_left-- == 0)
                throw Error::internal("synth: margin too wide, rejection sampling stalled");
            for (std::size_t j = 0; j < tree.p; ++j) x[j] = rng.next_double();
            bool ok = true;
            if (margin > 0.0) {
                for (std::size_t b = 0; b < tree.branch_count() && ok; ++b) {
                    double z = tree.split_thresholds[b];
                    for (std::size_t j = 0; j < tree.p; ++j)
                        z -= tree.split_weights(b, j) * x[j];
                    ok = std::abs(z) >= margin;
                }
            }
            if (ok) break;
        }
        for (std::size_t j = 0; j < tree.p; ++j) X(i, j) = x[j];
    }
    return X;
}

SynthData make_oblique_data(const SynthSpec& spec) {
    if (spec.n == 0) throw Error::user("synth: need n >= 1");
    Rng rng(spec.seed);
    SynthData out;
    out.tree = make_synth_tree(spec, rng);
    out.ds.features = sample_features_with_margin(out.tree, spec.n, spec.margin, rng);
    out.ds.targets = predict(out.tree, out.ds.features);
    if (spec.noise_sigma > 0.0)
        for (double& y : out.ds.targets) y += spec.noise_sigma * rng.normal();
    // Identity transform: features are already in the model domain.
    out.ds.norm.feat_min.assign(spec.p, 0.0);
    out.ds.norm.feat_max.assign(spec.p, 1.0);
    auto [lo, hi] = std::minmax_element(out.ds.targets.begin(), out.ds.targets.end());
    out.ds.norm.target_min = 0.0;
    out.ds.norm.target_max = 1.0;
    (void)lo;
    (void)hi;
    return out;
}

void write_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::user("synth: cannot write \"" + path + "\"");
    out.precision(17);
    for (std::size_t j = 0; j < ds.num_features(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.num_features(); ++j) out << ds.features(i, j) << ',';
        out << ds.targets[i] << '\n';
    }
    if (!out) throw Error::user("synth: write failed for \"" + path + "\"");
}

} // namespace obtree
