#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hetforest/dataset.hpp"
#include "hetforest/linear_models.hpp"
#include "hetforest/partition.hpp"

namespace hetforest {

struct AxisSplit {
    int feature = 0;  // global feature index
    double threshold = 0.0;
};

/// Axis-parallel test in rotated coordinates: route by
/// x[subset] . basis.col(component) <= threshold.
struct RotatedSplit {
    Eigen::MatrixXd basis;  // m x m, unit-norm columns
    std::vector<int> subset;
    int component = 0;
    double threshold = 0.0;
};

/// A node's routing rule. Boundary ties route left in every variant.
using SplitRule = std::variant<AxisSplit, Hyperplane, ProximalPair, RotatedSplit>;

/// True when the rule sends the sample to the left child.
bool routes_left(const SplitRule& rule, const Eigen::RowVectorXd& x);

struct TreeNode {
    // Internal nodes carry a rule and child slots; leaves carry class
    // counts and the majority class (lowest index on ties).
    std::optional<SplitRule> rule;
    int left = -1;
    int right = -1;
    std::vector<int64_t> counts;
    int majority = -1;

    bool is_leaf() const { return !rule.has_value(); }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int node_count() const { return static_cast<int>(nodes.size()); }
    int leaf_count() const;
    int depth() const;
};

enum class SplitFamily { kAxis, kMpsvm, kRotation, kHeterogeneous };
enum class RotationKind { kNone, kPca, kLda };

struct GrowthConfig {
    SplitFamily family = SplitFamily::kAxis;
    RotationKind rotation = RotationKind::kNone;
    MpsvmMode mpsvm_mode = MpsvmMode::kTikhonov;
    bool node_bootstrap = false;
    double bootstrap_threshold = 0.1;  // fraction of the full training size
    int minleaf = 1;
    int mtry = 0;   // 0 = floor(sqrt(f)), at least 1
    int top_m = 0;  // heterogeneous partition budget; 0 = class count
    double ridge_lambda = 0.1;
    double svm_c = 1.0;
    double lssvm_c = 1.0;
    double mpsvm_delta = 0.01;
    int svm_iterations = 500;
    GaParams ga;
};

/// Optional instrumentation filled during growth; pass nullptr to skip.
struct GrowthStats {
    long long nodes = 0;
    long long internal_nodes = 0;
    long long candidate_fits = 0;  // heterogeneous (partition, classifier) fits
    long long axis_fallbacks = 0;  // raw-MPSVM rank-deficiency fallbacks
    // One entry per split attempt: node size and whether it drew a
    // transient bootstrap sample.
    std::vector<std::pair<int, bool>> bootstrap_log;
    // Filled by train_forest: unique fraction of each tree's root rows.
    std::vector<double> root_unique_fraction;
};

double gini(const std::vector<int64_t>& counts);

/// Size-weighted child impurity of routing `rows` through `rule`;
/// +infinity when either child is empty.
double weighted_child_gini(const SplitRule& rule, const Eigen::MatrixXd& features,
                           const IndexSet& rows, const std::vector<int>& labels);

struct SplitCandidate {
    SplitRule rule;
    double impurity = 0.0;
};

/// Exhaustive scan over the feature subset with thresholds at midpoints
/// of consecutive distinct values. Ties resolve to the lower impurity,
/// then lower feature index, then lower threshold. Returns nullopt when
/// every subset feature is constant on the rows.
std::optional<SplitCandidate> best_axis_split(const Eigen::MatrixXd& features,
                                              const IndexSet& rows,
                                              const std::vector<int>& labels,
                                              const std::vector<int>& feature_subset);

/// PCA: eigenvectors of the node scatter matrix, descending eigenvalue.
/// LDA: generalized eigenvectors of (S_b, S_w + eps I), descending.
/// Columns are unit norm with the deterministic sign convention;
/// a degenerate scatter yields the identity basis.
Eigen::MatrixXd rotation_basis(const Eigen::MatrixXd& features, const IndexSet& rows,
                               const std::vector<int>& feature_subset, RotationKind kind,
                               const std::vector<int>& labels);

/// Draws the mtry feature subset and dispatches the per-variant split
/// search on the evaluation rows. Returns nullopt when no candidate
/// produces a valid split.
std::optional<SplitCandidate> best_split_for_variant(const Eigen::MatrixXd& features,
                                                     const IndexSet& eval_rows,
                                                     const std::vector<int>& labels,
                                                     const GrowthConfig& config,
                                                     std::uint64_t seed,
                                                     GrowthStats* stats = nullptr);

/// Grows one tree: transient node-level bootstraps choose the split,
/// the original rows are routed to the children.
Tree grow_tree(const Dataset& ds, const IndexSet& root_rows, const GrowthConfig& config,
               std::uint64_t seed, GrowthStats* stats = nullptr);

struct TreePrediction {
    int label = -1;
    std::vector<int64_t> counts;
};

TreePrediction predict_tree(const Tree& tree, const Eigen::RowVectorXd& x);

}  // namespace hetforest
