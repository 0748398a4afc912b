#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetforest/dataset.hpp"
#include "hetforest/tree.hpp"

namespace hetforest {

/// Every ensemble variant in the comparison. RaF-family variants
/// bootstrap once at the root; double (DRaF) variants grow on the full
/// data and bootstrap transiently at non-leaf nodes.
enum class Variant {
    kRaf,
    kDraf,
    kMpRafP,
    kMpRafT,
    kMpRafN,
    kMpDrafP,
    kMpDrafT,
    kRafPca,
    kRafLda,
    kDrafPca,
    kDrafLda,
    kHetRaf,
    kHetDraf,
};

inline constexpr int kVariantCount = 13;

struct VariantTraits {
    bool root_bootstrap = false;
    bool node_bootstrap = false;
    SplitFamily family = SplitFamily::kAxis;
    MpsvmMode mpsvm_mode = MpsvmMode::kTikhonov;
    RotationKind rotation = RotationKind::kNone;
};

VariantTraits variant_traits(Variant v);
std::string variant_name(Variant v);
std::optional<Variant> parse_variant(const std::string& name);
std::vector<Variant> all_variants();

struct ForestModel {
    int format_version = 1;
    Variant variant = Variant::kRaf;
    GrowthConfig config;
    int ntree = 0;
    std::vector<Tree> trees;
    std::vector<std::string> label_tokens;
    int class_count = 0;
    int feature_count = 0;
    std::optional<Normalizer> normalizer;
    // Training fingerprint.
    std::uint64_t seed = 0;
    int train_rows = 0;

    double mean_nodes() const;
    double mean_depth() const;
};

struct TrainOptions {
    int ntree = 50;
    std::uint64_t seed = 0;
    bool normalize = true;
    int threads = 0;  // 0 = hardware concurrency
};

/// Trains ntree trees for the variant; split family, root versus node
/// bootstrapping and regularization come from the variant's traits,
/// everything else from `config`. Per-tree seeds are derived up front so
/// the result is independent of scheduling.
ForestModel train_forest(const Dataset& ds, Variant variant, const GrowthConfig& config,
                         const TrainOptions& options, GrowthStats* stats = nullptr);

/// Majority vote over the trees; ties go to the lowest class index.
int predict(const ForestModel& model, const Eigen::RowVectorXd& x);

/// Per-class vote counts for one sample.
std::vector<int> vote_counts(const ForestModel& model, const Eigen::RowVectorXd& x);

std::vector<int> predict_rows(const ForestModel& model, const Eigen::MatrixXd& features);

struct Evaluation {
    double accuracy = 0.0;
    Eigen::MatrixXi confusion;  // rows: true class, cols: predicted
};

Evaluation evaluate(const ForestModel& model, const IndexSet& test_rows, const Dataset& ds);

}  // namespace hetforest
