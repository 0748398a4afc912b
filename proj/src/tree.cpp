#include "hetforest/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetforest/linalg.hpp"
#include "hetforest/random.hpp"

namespace hetforest {

namespace {

constexpr double kInvalidSplit = std::numeric_limits<double>::infinity();

std::vector<int64_t> label_counts(const IndexSet& rows, const std::vector<int>& labels,
                                  int class_count) {
    std::vector<int64_t> counts(class_count, 0);
    for (int r : rows) ++counts[labels[r]];
    return counts;
}

int argmax_lowest(const std::vector<int64_t>& counts) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return best;
}

int max_label(const std::vector<int>& labels, const IndexSet& rows) {
    int m = 0;
    for (int r : rows) m = std::max(m, labels[r]);
    return m;
}

double gini_from_counts(const std::vector<int64_t>& counts, int64_t total) {
    double sum_sq = 0.0;
    for (int64_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& features, const IndexSet& rows,
                       const std::vector<int>& subset) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(subset.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < subset.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                features(rows[i], subset[j]);
        }
    }
    return out;
}

struct AxisCoreResult {
    int column = -1;  // index into col_ids
    double threshold = 0.0;
    double impurity = kInvalidSplit;
};

/// Exhaustive midpoint-threshold scan over the columns of a local value
/// matrix. Columns must be supplied in ascending id order so the
/// first-strictly-better rule realizes the documented tie-breaks.
std::optional<AxisCoreResult> best_axis_core(const Eigen::MatrixXd& values,
                                             const std::vector<int>& row_labels) {
    const int n = static_cast<int>(values.rows());
    const int m = static_cast<int>(values.cols());
    const int k = 1 + *std::max_element(row_labels.begin(), row_labels.end());

    AxisCoreResult best;
    std::vector<std::pair<double, int>> sorted(n);
    std::vector<int64_t> total(k, 0);
    for (int label : row_labels) ++total[label];

    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) sorted[i] = {values(i, j), row_labels[i]};
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::vector<int64_t> left(k, 0);
        std::vector<int64_t> right = total;
        for (int i = 0; i + 1 < n; ++i) {
            ++left[sorted[i].second];
            --right[sorted[i].second];
            if (sorted[i].first >= sorted[i + 1].first) continue;
            const double threshold = (sorted[i].first + sorted[i + 1].first) / 2.0;
            const int64_t n_left = i + 1;
            const int64_t n_right = n - n_left;
            const double impurity = (static_cast<double>(n_left) * gini_from_counts(left, n_left) +
                                     static_cast<double>(n_right) * gini_from_counts(right, n_right)) /
                                    static_cast<double>(n);
            if (impurity < best.impurity ||
                (impurity == best.impurity &&
                 (j < best.column || (j == best.column && threshold < best.threshold)))) {
                best.column = j;
                best.threshold = threshold;
                best.impurity = impurity;
            }
        }
    }
    if (best.column < 0) return std::nullopt;
    return best;
}

}  // namespace

bool routes_left(const SplitRule& rule, const Eigen::RowVectorXd& x) {
    return std::visit(
        [&x](const auto& r) -> bool {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, AxisSplit>) {
                return x[r.feature] <= r.threshold;
            } else if constexpr (std::is_same_v<T, Hyperplane>) {
                return r.decision(x) <= 0.0;
            } else if constexpr (std::is_same_v<T, ProximalPair>) {
                // Nearer normalized proximal plane wins; ties go left.
                return std::abs(r.plane_a.decision(x)) <= std::abs(r.plane_b.decision(x));
            } else {
                double projected = 0.0;
                for (std::size_t j = 0; j < r.subset.size(); ++j) {
                    projected += x[r.subset[j]] * r.basis(static_cast<Eigen::Index>(j), r.component);
                }
                return projected <= r.threshold;
            }
        },
        rule);
}

int Tree::leaf_count() const {
    int leaves = 0;
    for (const auto& node : nodes) {
        if (node.is_leaf()) ++leaves;
    }
    return leaves;
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    int max_depth = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [index, depth] = stack.back();
        stack.pop_back();
        max_depth = std::max(max_depth, depth);
        const TreeNode& node = nodes[index];
        if (!node.is_leaf()) {
            stack.push_back({node.left, depth + 1});
            stack.push_back({node.right, depth + 1});
        }
    }
    return max_depth;
}

double gini(const std::vector<int64_t>& counts) {
    int64_t total = 0;
    for (int64_t c : counts) {
        if (c < 0) throw std::invalid_argument("gini: negative count");
        total += c;
    }
    if (total <= 0) throw std::invalid_argument("gini: zero total");
    return gini_from_counts(counts, total);
}

double weighted_child_gini(const SplitRule& rule, const Eigen::MatrixXd& features,
                           const IndexSet& rows, const std::vector<int>& labels) {
    if (rows.empty()) throw std::invalid_argument("weighted_child_gini: empty rows");
    const int k = 1 + max_label(labels, rows);
    std::vector<int64_t> left(k, 0), right(k, 0);
    int64_t n_left = 0, n_right = 0;
    for (int r : rows) {
        if (routes_left(rule, features.row(r))) {
            ++left[labels[r]];
            ++n_left;
        } else {
            ++right[labels[r]];
            ++n_right;
        }
    }
    if (n_left == 0 || n_right == 0) return kInvalidSplit;
    return (static_cast<double>(n_left) * gini_from_counts(left, n_left) +
            static_cast<double>(n_right) * gini_from_counts(right, n_right)) /
           static_cast<double>(n_left + n_right);
}

std::optional<SplitCandidate> best_axis_split(const Eigen::MatrixXd& features,
                                              const IndexSet& rows,
                                              const std::vector<int>& labels,
                                              const std::vector<int>& feature_subset) {
    if (rows.size() < 2) return std::nullopt;
    std::vector<int> subset = feature_subset;
    std::sort(subset.begin(), subset.end());

    Eigen::MatrixXd values = gather(features, rows, subset);
    std::vector<int> row_labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) row_labels[i] = labels[rows[i]];

    auto core = best_axis_core(values, row_labels);
    if (!core) return std::nullopt;
    SplitCandidate out;
    out.rule = AxisSplit{subset[core->column], core->threshold};
    out.impurity = core->impurity;
    return out;
}

Eigen::MatrixXd rotation_basis(const Eigen::MatrixXd& features, const IndexSet& rows,
                               const std::vector<int>& feature_subset, RotationKind kind,
                               const std::vector<int>& labels) {
    const int m = static_cast<int>(feature_subset.size());
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(m, m);
    if (rows.size() < 2 || kind == RotationKind::kNone) return identity;

    const Eigen::MatrixXd local = gather(features, rows, feature_subset);
    const Eigen::RowVectorXd mean = local.colwise().mean();
    const Eigen::MatrixXd centered = local.rowwise() - mean;

    Eigen::MatrixXd basis;
    if (kind == RotationKind::kPca) {
        Eigen::MatrixXd scatter =
            centered.transpose() * centered / static_cast<double>(rows.size());
        if (!scatter.allFinite() || scatter.trace() <= 0.0) return identity;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
        if (solver.info() != Eigen::Success) return identity;
        basis = solver.eigenvectors().rowwise().reverse();  // descending eigenvalues
    } else {
        // Between/within scatter over the classes present at the node.
        std::vector<int> classes = classes_present(rows, labels);
        if (classes.size() < 2) return identity;
        Eigen::MatrixXd within = Eigen::MatrixXd::Zero(m, m);
        Eigen::MatrixXd between = Eigen::MatrixXd::Zero(m, m);
        for (int c : classes) {
            IndexSet class_rows;
            for (int r : rows) {
                if (labels[r] == c) class_rows.push_back(r);
            }
            Eigen::MatrixXd class_local = gather(features, class_rows, feature_subset);
            Eigen::RowVectorXd class_mean = class_local.colwise().mean();
            Eigen::MatrixXd class_centered = class_local.rowwise() - class_mean;
            within += class_centered.transpose() * class_centered;
            Eigen::VectorXd d = (class_mean - mean).transpose();
            between += static_cast<double>(class_rows.size()) * (d * d.transpose());
        }
        const double trace = within.trace();
        const double eps = trace > 0 ? 1e-6 * trace / static_cast<double>(m) : 1e-6;
        within += eps * identity;
        if (!within.allFinite() || !between.allFinite()) return identity;
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between, within);
        if (solver.info() != Eigen::Success) return identity;
        basis = solver.eigenvectors().rowwise().reverse();
    }

    if (!basis.allFinite()) return identity;
    for (int j = 0; j < m; ++j) {
        const double norm = basis.col(j).norm();
        if (norm <= 1e-12) return identity;
        basis.col(j) /= norm;
        Eigen::VectorXd col = basis.col(j);
        apply_sign_convention(col);
        basis.col(j) = col;
    }
    return basis;
}

namespace {

/// Heterogeneous search: every (partition, classifier) pair over the
/// fixed classifier roster, scored by weighted child Gini on the
/// evaluation rows.
std::optional<SplitCandidate> best_heterogeneous_split(const Eigen::MatrixXd& features,
                                                       const IndexSet& rows,
                                                       const std::vector<int>& labels,
                                                       const std::vector<int>& subset,
                                                       const GrowthConfig& config,
                                                       std::uint64_t partition_seed,
                                                       GrowthStats* stats) {
    const std::vector<BinaryPartition> partitions =
        candidate_partitions(features, rows, labels, subset, config.top_m, partition_seed);
    const Eigen::MatrixXd local = gather(features, rows, subset);

    enum Classifier { kRidge, kOls, kSvm, kLda, kMpsvm, kLssvm, kClassifierCount };

    std::optional<SplitCandidate> best;
    int best_classifier = 0;
    int best_partition = 0;

    for (int pi = 0; pi < static_cast<int>(partitions.size()); ++pi) {
        const BinaryPartition& partition = partitions[pi];
        Eigen::VectorXd targets(rows.size());
        int n_pos = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const bool in_pos = std::binary_search(partition.pos.begin(), partition.pos.end(),
                                                   labels[rows[i]]);
            targets[static_cast<Eigen::Index>(i)] = in_pos ? 1.0 : -1.0;
            if (in_pos) ++n_pos;
        }
        Eigen::MatrixXd group_pos(n_pos, local.cols());
        Eigen::MatrixXd group_neg(static_cast<Eigen::Index>(rows.size()) - n_pos, local.cols());
        Eigen::Index ip = 0, in = 0;
        for (Eigen::Index i = 0; i < local.rows(); ++i) {
            if (targets[i] > 0) group_pos.row(ip++) = local.row(i);
            else group_neg.row(in++) = local.row(i);
        }

        for (int ci = 0; ci < kClassifierCount; ++ci) {
            if (stats) ++stats->candidate_fits;
            SplitRule rule;
            try {
                switch (ci) {
                    case kRidge: {
                        Hyperplane plane = fit_ridge(local, targets, config.ridge_lambda);
                        plane.feature_map = subset;
                        rule = std::move(plane);
                        break;
                    }
                    case kOls: {
                        Hyperplane plane = fit_ols(local, targets);
                        plane.feature_map = subset;
                        rule = std::move(plane);
                        break;
                    }
                    case kSvm: {
                        Hyperplane plane =
                            fit_svm(local, targets, config.svm_c, config.svm_iterations);
                        plane.feature_map = subset;
                        rule = std::move(plane);
                        break;
                    }
                    case kLda: {
                        Hyperplane plane = fit_lda(local, targets);
                        plane.feature_map = subset;
                        rule = std::move(plane);
                        break;
                    }
                    case kMpsvm: {
                        ProximalPair pair = fit_mpsvm(group_pos, group_neg, MpsvmMode::kTikhonov,
                                                      config.mpsvm_delta);
                        pair.plane_a.feature_map = subset;
                        pair.plane_b.feature_map = subset;
                        rule = std::move(pair);
                        break;
                    }
                    case kLssvm: {
                        Hyperplane plane = fit_lssvm(local, targets, config.lssvm_c);
                        plane.feature_map = subset;
                        rule = std::move(plane);
                        break;
                    }
                    default:
                        continue;
                }
            } catch (const FitError&) {
                continue;
            }
            const double impurity = weighted_child_gini(rule, features, rows, labels);
            if (!std::isfinite(impurity)) continue;
            const bool improves =
                !best || impurity < best->impurity ||
                (impurity == best->impurity &&
                 (ci < best_classifier || (ci == best_classifier && pi < best_partition)));
            if (improves) {
                best = SplitCandidate{std::move(rule), impurity};
                best_classifier = ci;
                best_partition = pi;
            }
        }
    }
    return best;
}

std::optional<SplitCandidate> best_mpsvm_split(const Eigen::MatrixXd& features,
                                               const IndexSet& rows,
                                               const std::vector<int>& labels,
                                               const std::vector<int>& subset,
                                               const GrowthConfig& config, GrowthStats* stats) {
    const BinaryPartition partition = bhattacharyya_partition(features, rows, labels, subset);
    IndexSet pos_rows, neg_rows;
    for (int r : rows) {
        const bool in_pos =
            std::binary_search(partition.pos.begin(), partition.pos.end(), labels[r]);
        (in_pos ? pos_rows : neg_rows).push_back(r);
    }
    try {
        ProximalPair pair = fit_mpsvm(gather(features, pos_rows, subset),
                                      gather(features, neg_rows, subset), config.mpsvm_mode,
                                      config.mpsvm_delta);
        pair.plane_a.feature_map = subset;
        pair.plane_b.feature_map = subset;
        SplitRule rule = std::move(pair);
        const double impurity = weighted_child_gini(rule, features, rows, labels);
        if (std::isfinite(impurity)) return SplitCandidate{std::move(rule), impurity};
    } catch (const RankDeficiencyError&) {
        // Axis-parallel split regularization: the raw mode's documented
        // fallback.
        if (stats) ++stats->axis_fallbacks;
        return best_axis_split(features, rows, labels, subset);
    } catch (const FitError&) {
        // Unusable groups under Tikhonov/null-space handling: no split.
    }
    if (config.mpsvm_mode == MpsvmMode::kRaw) {
        if (stats) ++stats->axis_fallbacks;
        return best_axis_split(features, rows, labels, subset);
    }
    return std::nullopt;
}

}  // namespace

std::optional<SplitCandidate> best_split_for_variant(const Eigen::MatrixXd& features,
                                                     const IndexSet& eval_rows,
                                                     const std::vector<int>& labels,
                                                     const GrowthConfig& config,
                                                     std::uint64_t seed, GrowthStats* stats) {
    const int f = static_cast<int>(features.cols());
    int mtry = config.mtry > 0 ? std::min(config.mtry, f)
                               : std::max(1, static_cast<int>(std::floor(std::sqrt(f))));
    SplitMix64 rng(derive_seed(seed, 0));
    const std::vector<int> subset = sample_without_replacement(f, mtry, rng);

    switch (config.family) {
        case SplitFamily::kAxis:
            return best_axis_split(features, eval_rows, labels, subset);
        case SplitFamily::kMpsvm:
            return best_mpsvm_split(features, eval_rows, labels, subset, config, stats);
        case SplitFamily::kRotation: {
            const Eigen::MatrixXd basis =
                rotation_basis(features, eval_rows, subset, config.rotation, labels);
            const Eigen::MatrixXd rotated = gather(features, eval_rows, subset) * basis;
            std::vector<int> row_labels(eval_rows.size());
            for (std::size_t i = 0; i < eval_rows.size(); ++i) row_labels[i] = labels[eval_rows[i]];
            auto core = best_axis_core(rotated, row_labels);
            if (!core) return std::nullopt;
            SplitCandidate out;
            out.rule = RotatedSplit{basis, subset, core->column, core->threshold};
            out.impurity = core->impurity;
            return out;
        }
        case SplitFamily::kHeterogeneous:
            return best_heterogeneous_split(features, eval_rows, labels, subset, config,
                                            derive_seed(seed, 1), stats);
    }
    return std::nullopt;
}

Tree grow_tree(const Dataset& ds, const IndexSet& root_rows, const GrowthConfig& config,
               std::uint64_t seed, GrowthStats* stats) {
    if (root_rows.empty()) throw std::invalid_argument("grow_tree: empty root rows");
    const int full_n = ds.rows();
    const int k = ds.class_count;

    Tree tree;
    struct Work {
        IndexSet rows;
        std::uint64_t seed;
        int node;
    };
    std::vector<Work> stack;
    tree.nodes.emplace_back();
    stack.push_back({root_rows, seed, 0});

    while (!stack.empty()) {
        Work work = std::move(stack.back());
        stack.pop_back();
        if (stats) ++stats->nodes;

        std::vector<int64_t> counts = label_counts(work.rows, ds.labels, k);
        const int majority = argmax_lowest(counts);
        auto make_leaf = [&]() {
            tree.nodes[work.node].counts = counts;
            tree.nodes[work.node].majority = majority;
        };

        const int64_t n_d = static_cast<int64_t>(work.rows.size());
        const bool pure = counts[majority] == n_d;
        if (pure || n_d <= config.minleaf) {
            make_leaf();
            continue;
        }

        // Transient evaluation sample: bootstrap only while the node is
        // still above the threshold fraction of the full training size.
        const bool take_bootstrap =
            config.node_bootstrap &&
            static_cast<double>(n_d) > config.bootstrap_threshold * static_cast<double>(full_n);
        if (stats) stats->bootstrap_log.push_back({static_cast<int>(n_d), take_bootstrap});
        IndexSet eval_rows =
            take_bootstrap ? bootstrap(work.rows, derive_seed(work.seed, 3)) : work.rows;

        std::vector<int64_t> eval_counts = label_counts(eval_rows, ds.labels, k);
        const int distinct_eval =
            static_cast<int>(std::count_if(eval_counts.begin(), eval_counts.end(),
                                           [](int64_t c) { return c > 0; }));
        if (distinct_eval < 2) {
            make_leaf();
            continue;
        }

        auto candidate = best_split_for_variant(ds.features, eval_rows, ds.labels, config,
                                                derive_seed(work.seed, 4), stats);
        // Accepted rules must strictly improve on the node impurity of the
        // evaluation rows.
        if (!candidate || !(candidate->impurity < gini(eval_counts))) {
            make_leaf();
            continue;
        }

        // The original rows are routed, never the bootstrap sample.
        IndexSet left_rows, right_rows;
        for (int r : work.rows) {
            (routes_left(candidate->rule, ds.features.row(r)) ? left_rows : right_rows).push_back(r);
        }
        if (left_rows.empty() || right_rows.empty()) {
            make_leaf();
            continue;
        }

        const int left_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[work.node].rule = std::move(candidate->rule);
        tree.nodes[work.node].left = left_index;
        tree.nodes[work.node].right = right_index;
        if (stats) ++stats->internal_nodes;

        stack.push_back({std::move(right_rows), derive_seed(work.seed, 2), right_index});
        stack.push_back({std::move(left_rows), derive_seed(work.seed, 1), left_index});
    }
    return tree;
}

TreePrediction predict_tree(const Tree& tree, const Eigen::RowVectorXd& x) {
    if (!x.allFinite()) throw std::invalid_argument("predict_tree: non-finite input");
    int index = 0;
    while (!tree.nodes[index].is_leaf()) {
        const TreeNode& node = tree.nodes[index];
        index = routes_left(*node.rule, x) ? node.left : node.right;
    }
    const TreeNode& leaf = tree.nodes[index];
    return {leaf.majority, leaf.counts};
}

}  // namespace hetforest
