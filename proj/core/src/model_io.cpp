#include "obtree/model_io.hpp"

#include <fstream>

#include "json.hpp"
#include "obtree/error.hpp"

namespace obtree {
namespace {

using nlohmann::json;

json norm_to_json(const NormalizationTransform& t) {
    return json{{"feat_min", t.feat_min},
                {"feat_max", t.feat_max},
                {"target_min", t.target_min},
                {"target_max", t.target_max}};
}

NormalizationTransform norm_from_json(const json& j) {
    NormalizationTransform t;
    t.feat_min = j.at("feat_min").get<std::vector<double>>();
    t.feat_max = j.at("feat_max").get<std::vector<double>>();
    t.target_min = j.at("target_min").get<double>();
    t.target_max = j.at("target_max").get<double>();
    if (t.feat_min.size() != t.feat_max.size())
        throw Error::user("model: norm min/max length mismatch");
    return t;
}

json envelope(const char* kind, const NormalizationTransform& norm) {
    json j;
    j["format_version"] = model_format_version;
    j["model_kind"] = kind;
    j["norm"] = norm_to_json(norm);
    return j;
}

json axis_payload(const AxisTree& tree) {
    json nodes = json::array();
    for (const auto& nd : tree.nodes)
        nodes.push_back(json{{"feature", nd.feature},
                             {"threshold", nd.threshold},
                             {"value", nd.value},
                             {"left", nd.left},
                             {"right", nd.right}});
    return json{{"nodes", std::move(nodes)},
                {"max_depth", tree.max_depth},
                {"min_samples_split", tree.min_samples_split}};
}

AxisTree axis_from_json(const json& j) {
    AxisTree tree;
    tree.max_depth = j.at("max_depth").get<int>();
    tree.min_samples_split = j.at("min_samples_split").get<int>();
    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty()) throw Error::user("model: cart payload has no nodes");
    for (const json& nj : nodes) {
        AxisTree::Node nd;
        nd.feature = nj.at("feature").get<int>();
        nd.threshold = nj.at("threshold").get<double>();
        nd.value = nj.at("value").get<double>();
        nd.left = nj.at("left").get<int>();
        nd.right = nj.at("right").get<int>();
        int count = static_cast<int>(nodes.size());
        if (nd.feature >= 0 && (nd.left < 0 || nd.right < 0 || nd.left >= count || nd.right >= count))
            throw Error::user("model: cart branch child out of range");
        tree.nodes.push_back(nd);
    }
    return tree;
}

} // namespace

std::string serialize(const ObliqueTree& tree, const NormalizationTransform& norm) {
    json j = envelope("oblique_tree", norm);
    j["depth"] = tree.depth;
    j["p"] = tree.p;
    j["leaf_mode"] = tree.leaf_mode == LeafMode::constant ? "constant" : "linear";
    json splits = json::array();
    for (std::size_t b = 0; b < tree.branch_count(); ++b) {
        std::vector<double> a(tree.split_weights.row(b).begin(), tree.split_weights.row(b).end());
        splits.push_back(json{{"a", std::move(a)}, {"b", tree.split_thresholds[b]}});
    }
    j["splits"] = std::move(splits);
    json leaves = json::array();
    for (std::size_t li = 0; li < tree.leaf_count(); ++li) {
        std::vector<double> k(tree.leaf_coeffs.row(li).begin(), tree.leaf_coeffs.row(li).end());
        leaves.push_back(json{{"k", std::move(k)}, {"h", tree.leaf_intercepts[li]}});
    }
    j["leaves"] = std::move(leaves);
    return j.dump(2);
}

std::string serialize(const AxisTree& tree, const NormalizationTransform& norm) {
    json j = envelope("cart", norm);
    j.update(axis_payload(tree));
    return j.dump(2);
}

std::string serialize(const Forest& forest, const NormalizationTransform& norm) {
    json j = envelope("random_forest", norm);
    json trees = json::array();
    for (const AxisTree& t : forest.trees) trees.push_back(axis_payload(t));
    j["trees"] = std::move(trees);
    j["m"] = forest.m;
    j["bootstrap"] = forest.bootstrap;
    j["tree_seeds"] = forest.tree_seeds;
    return j.dump(2);
}

LoadedModel deserialize_model(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error::user(std::string("model: invalid JSON: ") + e.what());
    }
    try {
        LoadedModel out;
        if (!j.contains("format_version")) throw Error::user("model: missing format_version");
        int ver = j.at("format_version").get<int>();
        if (ver != model_format_version)
            throw Error::user("model: unsupported format_version " + std::to_string(ver));
        out.model_kind = j.at("model_kind").get<std::string>();
        out.norm = norm_from_json(j.at("norm"));

        if (out.model_kind == "oblique_tree") {
            if (!j.contains("depth")) throw Error::user("model: missing depth");
            int depth = j.at("depth").get<int>();
            std::size_t p = j.at("p").get<std::size_t>();
            std::string mode = j.at("leaf_mode").get<std::string>();
            if (mode != "constant" && mode != "linear")
                throw Error::user("model: unknown leaf_mode \"" + mode + "\"");
            ObliqueTree tree =
                make_tree(depth, p, mode == "constant" ? LeafMode::constant : LeafMode::linear);
            const json& splits = j.at("splits");
            if (splits.size() != tree.branch_count())
                throw Error::user("model: expected " + std::to_string(tree.branch_count()) +
                                  " splits, got " + std::to_string(splits.size()));
            for (std::size_t b = 0; b < tree.branch_count(); ++b) {
                auto a = splits[b].at("a").get<std::vector<double>>();
                if (a.size() != p) throw Error::user("model: split weight length mismatch");
                for (std::size_t jx = 0; jx < p; ++jx) tree.split_weights(b, jx) = a[jx];
                tree.split_thresholds[b] = splits[b].at("b").get<double>();
            }
            const json& leaves = j.at("leaves");
            if (leaves.size() != tree.leaf_count())
                throw Error::user("model: expected " + std::to_string(tree.leaf_count()) +
                                  " leaves, got " + std::to_string(leaves.size()));
            for (std::size_t li = 0; li < tree.leaf_count(); ++li) {
                auto k = leaves[li].at("k").get<std::vector<double>>();
                if (k.size() != p) throw Error::user("model: leaf coefficient length mismatch");
                for (std::size_t jx = 0; jx < p; ++jx) {
                    if (tree.leaf_mode == LeafMode::constant && k[jx] != 0.0)
                        throw Error::user("model: constant-mode leaf has nonzero k");
                    tree.leaf_coeffs(li, jx) = k[jx];
                }
                tree.leaf_intercepts[li] = leaves[li].at("h").get<double>();
            }
            if (out.norm.feat_min.size() != p)
                throw Error::user("model: norm feature count mismatch");
            out.oblique = std::move(tree);
        } else if (out.model_kind == "cart") {
            out.axis = axis_from_json(j);
        } else if (out.model_kind == "random_forest") {
            const json& trees = j.at("trees");
            if (!trees.is_array() || trees.empty())
                throw Error::user("model: forest payload has no trees");
            for (const json& tj : trees) out.forest.trees.push_back(axis_from_json(tj));
            out.forest.m = j.at("m").get<std::size_t>();
            out.forest.bootstrap = j.at("bootstrap").get<bool>();
            out.forest.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
        } else {
            throw Error::user("model: unknown model_kind \"" + out.model_kind + "\"");
        }
        return out;
    } catch (const json::exception& e) {
        throw Error::user(std::string("model: schema violation: ") + e.what());
    }
}

void save_model_file(const std::string& path, const std::string& json_text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::user("model: cannot write \"" + path + "\"");
    out << json_text << '\n';
    if (!out) throw Error::user("model: write failed for \"" + path + "\"");
}

LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::user("model: cannot open \"" + path + "\"");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(text);
}

} // namespace obtree
