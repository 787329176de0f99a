#ifndef OBTREE_DATASET_HPP
#define OBTREE_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "obtree/csv.hpp"
#include "obtree/matrix.hpp"

namespace obtree {

/// Per-column min-max statistics captured when a training set is normalized.
/// Invariant: min[j] <= max[j]; min[j] == max[j] marks a constant column.
struct NormalizationTransform {
    std::vector<double> feat_min;
    std::vector<double> feat_max;
    double target_min = 0.0;
    double target_max = 0.0;
};

/// Feature matrix plus aligned targets. Rows produced by `normalize` lie in
/// [0,1]; rows produced by `apply_transform` on held-out data may not (the
/// transform's statistics come from the fitting partition only).
struct Dataset {
    Matrix features;                        // n x p
    std::vector<double> targets;            // length n
    std::vector<std::string> feature_names; // empty when the source had no header
    NormalizationTransform norm;            // transform that produced this dataset

    std::size_t size() const { return targets.size(); }
    std::size_t num_features() const { return features.cols(); }
};

/// Min-max normalizes features and targets to [0,1] and records the
/// transform inside the result. Constant columns map to 0.0. Errors
/// (Error::user) on empty data.
Dataset normalize(const RawData& raw);

/// Applies a previously fit transform to new rows. Constant-in-fitting
/// columns map to 0.0 regardless of the incoming value. Raw targets may be
/// absent (feature-only data); the result then has targets sized to n
/// filled with 0, usable only for prediction.
Dataset apply_transform(const RawData& raw, const NormalizationTransform& t);

/// Maps a normalized model output back to the original target scale.
double denormalize_target(double y, const NormalizationTransform& t);

enum class SplitMode : std::uint8_t {
    holdout_75_25,    // train/test
    holdout_50_25_25, // train/val/test
    kfold,            // k cross-validation folds
};

struct SplitSpec {
    SplitMode mode = SplitMode::holdout_75_25;
    int k = 5; // folds; used only when mode == kfold
    std::uint64_t seed = 0;
};

/// Row-index partitions. Unused vectors stay empty: holdout_75_25 fills
/// train/test, holdout_50_25_25 all three, kfold only `folds`. Sizes are
/// rounded so the partitions are disjoint and cover 0..n-1 exactly.
struct Partitions {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::vector<std::vector<std::size_t>> folds;
};

/// Shuffles 0..n-1 with the seeded generator (Fisher-Yates over
/// xoshiro256++) and slices per the spec. Deterministic in (n, spec).
/// Errors (Error::user) when any partition would be empty.
Partitions split_indices(std::size_t n, const SplitSpec& spec);

/// Convenience wrapper over split_indices for a dataset.
Partitions split(const Dataset& ds, const SplitSpec& spec);

/// Extracts the given rows into a new dataset (order preserved, transform
/// and names carried over). Working sets may be empty.
Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows);

/// Extracts the given rows of raw (unnormalized) data, order preserved.
RawData subset(const RawData& d, const std::vector<std::size_t>& rows);

} // namespace obtree

#endif // OBTREE_DATASET_HPP
