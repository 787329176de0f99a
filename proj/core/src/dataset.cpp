#include "obtree/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "obtree/error.hpp"
#include "obtree/rng.hpp"

namespace obtree {
namespace {

double rescale(double v, double lo, double hi) {
    if (!(hi > lo)) return 0.0; // constant column
    return (v - lo) / (hi - lo);
}

} // namespace

Dataset normalize(const RawData& raw) {
    std::size_t n = raw.features.rows();
    std::size_t p = raw.features.cols();
    if (n == 0 || p == 0) throw Error::user("normalize: empty data");
    if (raw.targets.size() != n) throw Error::user("normalize: feature/target row mismatch");

    NormalizationTransform t;
    t.feat_min.assign(p, 0.0);
    t.feat_max.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double lo = raw.features(0, j), hi = raw.features(0, j);
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, raw.features(i, j));
            hi = std::max(hi, raw.features(i, j));
        }
        t.feat_min[j] = lo;
        t.feat_max[j] = hi;
    }
    auto [ylo, yhi] = std::minmax_element(raw.targets.begin(), raw.targets.end());
    t.target_min = *ylo;
    t.target_max = *yhi;

    Dataset ds = apply_transform(raw, t);
    ds.feature_names = raw.feature_names;
    return ds;
}

Dataset apply_transform(const RawData& raw, const NormalizationTransform& t) {
    std::size_t n = raw.features.rows();
    std::size_t p = raw.features.cols();
    if (p != t.feat_min.size())
        throw Error::user("apply_transform: data has " + std::to_string(p) +
                          " features, transform expects " + std::to_string(t.feat_min.size()));
    Dataset ds;
    ds.norm = t;
    ds.feature_names = raw.feature_names;
    ds.features = Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            ds.features(i, j) = rescale(raw.features(i, j), t.feat_min[j], t.feat_max[j]);
    if (raw.targets.empty()) {
        ds.targets.assign(n, 0.0);
    } else {
        ds.targets.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            ds.targets[i] = rescale(raw.targets[i], t.target_min, t.target_max);
    }
    return ds;
}

double denormalize_target(double y, const NormalizationTransform& t) {
    if (!(t.target_max > t.target_min)) return t.target_min;
    return t.target_min + y * (t.target_max - t.target_min);
}

Partitions split_indices(std::size_t n, const SplitSpec& spec) {
    if (n == 0) throw Error::user("split: empty dataset");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(spec.seed);
    // Fisher-Yates; the generator identity (xoshiro256++ seeded via
    // splitmix64) is part of the reproducibility contract.
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }

    auto take = [&](std::size_t from, std::size_t count) {
        return std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(from),
                                        order.begin() + static_cast<std::ptrdiff_t>(from + count));
    };
    auto rounded = [](double x) { return static_cast<std::size_t>(std::llround(x)); };

    Partitions parts;
    switch (spec.mode) {
    case SplitMode::holdout_75_25: {
        std::size_t ntrain = std::min(n - 1, rounded(0.75 * static_cast<double>(n)));
        parts.train = take(0, ntrain);
        parts.test = take(ntrain, n - ntrain);
        if (parts.train.empty() || parts.test.empty())
            throw Error::user("split: a 75/25 partition of " + std::to_string(n) +
                              " rows would be empty");
        break;
    }
    case SplitMode::holdout_50_25_25: {
        std::size_t ntrain = rounded(0.50 * static_cast<double>(n));
        std::size_t nval = rounded(0.25 * static_cast<double>(n));
        if (ntrain == 0 || nval == 0 || ntrain + nval >= n)
            throw Error::user("split: a 50/25/25 partition of " + std::to_string(n) +
                              " rows would be empty");
        parts.train = take(0, ntrain);
        parts.val = take(ntrain, nval);
        parts.test = take(ntrain + nval, n - ntrain - nval);
        break;
    }
    case SplitMode::kfold: {
        if (spec.k < 2) throw Error::user("split: kfold needs k >= 2");
        std::size_t k = static_cast<std::size_t>(spec.k);
        if (n < k)
            throw Error::user("split: " + std::to_string(k) + " folds over " + std::to_string(n) +
                              " rows would leave empty folds");
        parts.folds.resize(k);
        std::size_t at = 0;
        for (std::size_t f = 0; f < k; ++f) {
            std::size_t len = n / k + (f < n % k ? 1 : 0);
            parts.folds[f] = take(at, len);
            at += len;
        }
        break;
    }
    }
    return parts;
}

Partitions split(const Dataset& ds, const SplitSpec& spec) { return split_indices(ds.size(), spec); }

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.norm = d.norm;
    out.feature_names = d.feature_names;
    out.features = Matrix(rows.size(), d.features.cols());
    out.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d.features.cols(); ++j)
            out.features(i, j) = d.features(rows[i], j);
        out.targets[i] = d.targets[rows[i]];
    }
    return out;
}

RawData subset(const RawData& d, const std::vector<std::size_t>& rows) {
    RawData out;
    out.feature_names = d.feature_names;
    out.features = Matrix(rows.size(), d.features.cols());
    if (!d.targets.empty()) out.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d.features.cols(); ++j)
            out.features(i, j) = d.features(rows[i], j);
        if (!d.targets.empty()) out.targets[i] = d.targets[rows[i]];
    }
    return out;
}

} // namespace obtree
