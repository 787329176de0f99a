#ifndef OBTREE_MODEL_IO_HPP
#define OBTREE_MODEL_IO_HPP

#include <string>

#include "obtree/baselines.hpp"
#include "obtree/dataset.hpp"
#include "obtree/tree.hpp"

namespace obtree {

/// Model files share one JSON envelope: {"format_version": 1,
/// "model_kind": "oblique_tree" | "cart" | "random_forest", ...payload,
/// "norm": {...}}. Oblique payloads carry depth, p, leaf_mode, splits
/// (breadth-first [{a, b}]) and leaves ([{k, h}]); baseline payloads carry
/// their node pools. Deserialization validates shape and invariants
/// (constant-mode leaves must have all-zero k) and errors (Error::user)
/// on schema violations or unsupported versions.

inline constexpr int model_format_version = 1;

std::string serialize(const ObliqueTree& tree, const NormalizationTransform& norm);
std::string serialize(const AxisTree& tree, const NormalizationTransform& norm);
std::string serialize(const Forest& forest, const NormalizationTransform& norm);

struct LoadedModel {
    std::string model_kind; // "oblique_tree" | "cart" | "random_forest"
    ObliqueTree oblique;
    AxisTree axis;
    Forest forest;
    NormalizationTransform norm;
};

LoadedModel deserialize_model(const std::string& json_text);

void save_model_file(const std::string& path, const std::string& json_text);
LoadedModel load_model_file(const std::string& path);

} // namespace obtree

#endif // OBTREE_MODEL_IO_HPP
