#include "hetforest/forest.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>

#include "hetforest/random.hpp"

namespace hetforest {

VariantTraits variant_traits(Variant v) {
    switch (v) {
        case Variant::kRaf:
            return {true, false, SplitFamily::kAxis, MpsvmMode::kTikhonov, RotationKind::kNone};
        case Variant::kDraf:
            return {false, true, SplitFamily::kAxis, MpsvmMode::kTikhonov, RotationKind::kNone};
        case Variant::kMpRafP:
            return {true, false, SplitFamily::kMpsvm, MpsvmMode::kRaw, RotationKind::kNone};
        case Variant::kMpRafT:
            return {true, false, SplitFamily::kMpsvm, MpsvmMode::kTikhonov, RotationKind::kNone};
        case Variant::kMpRafN:
            return {true, false, SplitFamily::kMpsvm, MpsvmMode::kNullspace, RotationKind::kNone};
        case Variant::kMpDrafP:
            return {false, true, SplitFamily::kMpsvm, MpsvmMode::kRaw, RotationKind::kNone};
        case Variant::kMpDrafT:
            return {false, true, SplitFamily::kMpsvm, MpsvmMode::kTikhonov, RotationKind::kNone};
        case Variant::kRafPca:
            return {true, false, SplitFamily::kRotation, MpsvmMode::kTikhonov, RotationKind::kPca};
        case Variant::kRafLda:
            return {true, false, SplitFamily::kRotation, MpsvmMode::kTikhonov, RotationKind::kLda};
        case Variant::kDrafPca:
            return {false, true, SplitFamily::kRotation, MpsvmMode::kTikhonov, RotationKind::kPca};
        case Variant::kDrafLda:
            return {false, true, SplitFamily::kRotation, MpsvmMode::kTikhonov, RotationKind::kLda};
        case Variant::kHetRaf:
            return {true, false, SplitFamily::kHeterogeneous, MpsvmMode::kTikhonov,
                    RotationKind::kNone};
        case Variant::kHetDraf:
            return {false, true, SplitFamily::kHeterogeneous, MpsvmMode::kTikhonov,
                    RotationKind::kNone};
    }
    throw std::invalid_argument("unknown variant");
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::kRaf: return "raf";
        case Variant::kDraf: return "draf";
        case Variant::kMpRafP: return "mpraf-p";
        case Variant::kMpRafT: return "mpraf-t";
        case Variant::kMpRafN: return "mpraf-n";
        case Variant::kMpDrafP: return "mpdraf-p";
        case Variant::kMpDrafT: return "mpdraf-t";
        case Variant::kRafPca: return "raf-pca";
        case Variant::kRafLda: return "raf-lda";
        case Variant::kDrafPca: return "draf-pca";
        case Variant::kDrafLda: return "draf-lda";
        case Variant::kHetRaf: return "het-raf";
        case Variant::kHetDraf: return "het-draf";
    }
    return "unknown";
}

std::vector<Variant> all_variants() {
    return {Variant::kRaf,     Variant::kDraf,    Variant::kMpRafP,  Variant::kMpRafT,
            Variant::kMpRafN,  Variant::kMpDrafP, Variant::kMpDrafT, Variant::kRafPca,
            Variant::kRafLda,  Variant::kDrafPca, Variant::kDrafLda, Variant::kHetRaf,
            Variant::kHetDraf};
}

std::optional<Variant> parse_variant(const std::string& name) {
    std::string lowered = name;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Variant v : all_variants()) {
        if (variant_name(v) == lowered) return v;
    }
    return std::nullopt;
}

double ForestModel::mean_nodes() const {
    if (trees.empty()) return 0.0;
    double total = 0.0;
    for (const auto& tree : trees) total += static_cast<double>(tree.node_count());
    return total / static_cast<double>(trees.size());
}

double ForestModel::mean_depth() const {
    if (trees.empty()) return 0.0;
    double total = 0.0;
    for (const auto& tree : trees) total += static_cast<double>(tree.depth());
    return total / static_cast<double>(trees.size());
}

ForestModel train_forest(const Dataset& ds, Variant variant, const GrowthConfig& config,
                         const TrainOptions& options, GrowthStats* stats) {
    ds.validate();
    if (options.ntree < 1) throw std::invalid_argument("ntree must be at least 1");

    const VariantTraits traits = variant_traits(variant);
    GrowthConfig grow_config = config;
    grow_config.family = traits.family;
    grow_config.mpsvm_mode = traits.mpsvm_mode;
    grow_config.rotation = traits.rotation;
    grow_config.node_bootstrap = traits.node_bootstrap;

    ForestModel model;
    model.variant = variant;
    model.config = grow_config;
    model.ntree = options.ntree;
    model.label_tokens = ds.label_tokens;
    model.class_count = ds.class_count;
    model.feature_count = ds.cols();
    model.seed = options.seed;
    model.train_rows = ds.rows();

    const Dataset* train_ds = &ds;
    Dataset normalized;
    if (options.normalize) {
        model.normalizer = Normalizer::fit(ds.features, all_rows(ds.rows()));
        normalized = ds;
        normalized.features = model.normalizer->apply_matrix(ds.features);
        train_ds = &normalized;
    }

    model.trees.resize(options.ntree);
    const IndexSet everything = all_rows(ds.rows());

    auto grow_one = [&](int i, GrowthStats* tree_stats) {
        const std::uint64_t root_seed = derive_seed(options.seed, 2 * static_cast<std::uint64_t>(i));
        const std::uint64_t tree_seed =
            derive_seed(options.seed, 2 * static_cast<std::uint64_t>(i) + 1);
        IndexSet root_rows = traits.root_bootstrap ? bootstrap(everything, root_seed) : everything;
        if (tree_stats) {
            std::set<int> unique(root_rows.begin(), root_rows.end());
            tree_stats->root_unique_fraction.push_back(static_cast<double>(unique.size()) /
                                                       static_cast<double>(root_rows.size()));
        }
        model.trees[i] = grow_tree(*train_ds, root_rows, grow_config, tree_seed, tree_stats);
    };

    int threads = options.threads > 0 ? options.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, options.ntree));

    if (stats || threads == 1) {
        // Instrumented runs stay serial so the log order is reproducible.
        for (int i = 0; i < options.ntree; ++i) grow_one(i, stats);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                for (int i = next.fetch_add(1); i < options.ntree; i = next.fetch_add(1)) {
                    grow_one(i, nullptr);
                }
            });
        }
        for (auto& worker : pool) worker.join();
    }
    return model;
}

std::vector<int> vote_counts(const ForestModel& model, const Eigen::RowVectorXd& x) {
    if (x.size() != model.feature_count) {
        throw std::invalid_argument("predict: expected " + std::to_string(model.feature_count) +
                                    " features, got " + std::to_string(x.size()));
    }
    if (!x.allFinite()) throw std::invalid_argument("predict: non-finite input");
    Eigen::RowVectorXd row = model.normalizer ? model.normalizer->apply(x) : x;
    std::vector<int> votes(model.class_count, 0);
    for (const auto& tree : model.trees) ++votes[predict_tree(tree, row).label];
    return votes;
}

int predict(const ForestModel& model, const Eigen::RowVectorXd& x) {
    const std::vector<int> votes = vote_counts(model, x);
    int best = 0;
    for (int c = 1; c < model.class_count; ++c) {
        if (votes[c] > votes[best]) best = c;
    }
    return best;
}

std::vector<int> predict_rows(const ForestModel& model, const Eigen::MatrixXd& features) {
    std::vector<int> out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) out[i] = predict(model, features.row(i));
    return out;
}

Evaluation evaluate(const ForestModel& model, const IndexSet& test_rows, const Dataset& ds) {
    if (test_rows.empty()) throw std::invalid_argument("evaluate: empty test set");
    Evaluation out;
    out.confusion = Eigen::MatrixXi::Zero(model.class_count, model.class_count);
    for (int r : test_rows) {
        const int predicted = predict(model, ds.features.row(r));
        out.confusion(ds.labels[r], predicted) += 1;
    }
    out.accuracy = static_cast<double>(out.confusion.trace()) /
                   static_cast<double>(out.confusion.sum());
    return out;
}

}  // namespace hetforest
