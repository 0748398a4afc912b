#include "hetforest/model_io.hpp"

#include <fstream>
#include <json.hpp>

namespace hetforest {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json plane_to_json(const Hyperplane& plane) {
    return json{{"w", vector_to_json(plane.w)},
                {"b", plane.b},
                {"features", plane.feature_map}};
}

Hyperplane plane_from_json(const json& j) {
    Hyperplane plane;
    plane.w = vector_from_json(j.at("w"));
    plane.b = j.at("b").get<double>();
    plane.feature_map = j.at("features").get<std::vector<int>>();
    return plane;
}

json rule_to_json(const SplitRule& rule) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, AxisSplit>) {
                return json{{"kind", "axis"}, {"feature", r.feature}, {"threshold", r.threshold}};
            } else if constexpr (std::is_same_v<T, Hyperplane>) {
                json out = plane_to_json(r);
                out["kind"] = "oblique";
                return out;
            } else if constexpr (std::is_same_v<T, ProximalPair>) {
                return json{{"kind", "proximal"},
                            {"plane_a", plane_to_json(r.plane_a)},
                            {"plane_b", plane_to_json(r.plane_b)}};
            } else {
                return json{{"kind", "rotated"},
                            {"basis", matrix_to_json(r.basis)},
                            {"subset", r.subset},
                            {"component", r.component},
                            {"threshold", r.threshold}};
            }
        },
        rule);
}

SplitRule rule_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "axis") {
        return AxisSplit{j.at("feature").get<int>(), j.at("threshold").get<double>()};
    }
    if (kind == "oblique") {
        return plane_from_json(j);
    }
    if (kind == "proximal") {
        return ProximalPair{plane_from_json(j.at("plane_a")), plane_from_json(j.at("plane_b"))};
    }
    if (kind == "rotated") {
        RotatedSplit r;
        r.basis = matrix_from_json(j.at("basis"));
        r.subset = j.at("subset").get<std::vector<int>>();
        r.component = j.at("component").get<int>();
        r.threshold = j.at("threshold").get<double>();
        return r;
    }
    throw DataError("model file: unknown split kind \"" + kind + "\"");
}

json node_to_json(const Tree& tree, int index) {
    const TreeNode& node = tree.nodes[index];
    if (node.is_leaf()) {
        return json{{"counts", node.counts}, {"majority", node.majority}};
    }
    return json{{"split", rule_to_json(*node.rule)},
                {"left", node_to_json(tree, node.left)},
                {"right", node_to_json(tree, node.right)}};
}

int node_from_json(const json& j, Tree& tree) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("split")) {
        SplitRule rule = rule_from_json(j.at("split"));
        const int left = node_from_json(j.at("left"), tree);
        const int right = node_from_json(j.at("right"), tree);
        tree.nodes[index].rule = std::move(rule);
        tree.nodes[index].left = left;
        tree.nodes[index].right = right;
    } else {
        tree.nodes[index].counts = j.at("counts").get<std::vector<int64_t>>();
        tree.nodes[index].majority = j.at("majority").get<int>();
    }
    return index;
}

}  // namespace

std::string model_to_json(const ForestModel& model) {
    json doc;
    doc["format_version"] = model.format_version;
    doc["variant"] = variant_name(model.variant);
    doc["ntree"] = model.ntree;
    doc["class_count"] = model.class_count;
    doc["feature_count"] = model.feature_count;
    doc["label_map"] = model.label_tokens;
    doc["seed"] = model.seed;
    doc["train_rows"] = model.train_rows;

    const GrowthConfig& c = model.config;
    doc["config"] = json{{"minleaf", c.minleaf},
                         {"mtry", c.mtry},
                         {"top_m", c.top_m},
                         {"bootstrap_threshold", c.bootstrap_threshold},
                         {"ridge_lambda", c.ridge_lambda},
                         {"svm_c", c.svm_c},
                         {"lssvm_c", c.lssvm_c},
                         {"mpsvm_delta", c.mpsvm_delta},
                         {"svm_iterations", c.svm_iterations}};

    if (model.normalizer) {
        doc["normalizer"] = json{{"mean", vector_to_json(model.normalizer->mean)},
                                 {"scale", vector_to_json(model.normalizer->scale)}};
    } else {
        doc["normalizer"] = nullptr;
    }

    json trees = json::array();
    for (const auto& tree : model.trees) trees.push_back(node_to_json(tree, 0));
    doc["trees"] = std::move(trees);
    return doc.dump(1);
}

ForestModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != 1) {
            throw DataError("unknown model format version " + std::to_string(version));
        }
        ForestModel model;
        model.format_version = version;
        const std::string name = doc.at("variant").get<std::string>();
        auto variant = parse_variant(name);
        if (!variant) throw DataError("model file: unknown variant \"" + name + "\"");
        model.variant = *variant;
        model.ntree = doc.at("ntree").get<int>();
        model.class_count = doc.at("class_count").get<int>();
        model.feature_count = doc.at("feature_count").get<int>();
        model.label_tokens = doc.at("label_map").get<std::vector<std::string>>();
        model.seed = doc.at("seed").get<std::uint64_t>();
        model.train_rows = doc.at("train_rows").get<int>();

        const json& c = doc.at("config");
        const VariantTraits traits = variant_traits(model.variant);
        model.config.family = traits.family;
        model.config.mpsvm_mode = traits.mpsvm_mode;
        model.config.rotation = traits.rotation;
        model.config.node_bootstrap = traits.node_bootstrap;
        model.config.minleaf = c.at("minleaf").get<int>();
        model.config.mtry = c.at("mtry").get<int>();
        model.config.top_m = c.at("top_m").get<int>();
        model.config.bootstrap_threshold = c.at("bootstrap_threshold").get<double>();
        model.config.ridge_lambda = c.at("ridge_lambda").get<double>();
        model.config.svm_c = c.at("svm_c").get<double>();
        model.config.lssvm_c = c.at("lssvm_c").get<double>();
        model.config.mpsvm_delta = c.at("mpsvm_delta").get<double>();
        model.config.svm_iterations = c.at("svm_iterations").get<int>();

        if (!doc.at("normalizer").is_null()) {
            Normalizer norm;
            norm.mean = vector_from_json(doc.at("normalizer").at("mean"));
            norm.scale = vector_from_json(doc.at("normalizer").at("scale"));
            model.normalizer = std::move(norm);
        }

        for (const auto& tree_json : doc.at("trees")) {
            Tree tree;
            node_from_json(tree_json, tree);
            model.trees.push_back(std::move(tree));
        }
        if (static_cast<int>(model.trees.size()) != model.ntree) {
            throw DataError("model file: tree count does not match ntree");
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const ForestModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << model_to_json(model) << '\n';
    if (!out) throw DataError("failed writing model file: " + path);
}

ForestModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace hetforest
