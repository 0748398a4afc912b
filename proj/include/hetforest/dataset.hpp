#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetforest {

/// Raised for anything wrong with user-supplied data (files, CSV cells,
/// schema mismatches). The CLI maps it to its data-error exit code.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered row indices into a Dataset; duplicates are permitted so the
/// same type carries bootstrap samples.
using IndexSet = std::vector<int>;

/// Immutable tabular classification dataset. Labels are dense integers
/// in [0, class_count); `label_tokens` maps them back to the original
/// CSV tokens.
struct Dataset {
    Eigen::MatrixXd features;               // N x f
    std::vector<int> labels;                 // length N
    int class_count = 0;
    std::vector<std::string> label_tokens;   // size class_count
    std::vector<std::string> feature_names;  // optional, empty if unnamed
    std::string name;                        // optional, e.g. file stem

    int rows() const { return static_cast<int>(features.rows()); }
    int cols() const { return static_cast<int>(features.cols()); }

    /// Checks the type invariants; throws DataError on violation.
    void validate() const;
};

struct CsvOptions {
    bool has_header = false;
    int label_column = -1;  // -1 selects the last column
};

/// Loads a comma-separated file: numeric feature cells plus one
/// categorical label column. Tokens are encoded to 0..K-1 in
/// lexicographic order.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Writes a dataset back out in the same CSV dialect (label last).
void save_csv(const Dataset& ds, const std::string& path);

struct FoldPlan {
    struct Fold {
        IndexSet train;
        IndexSet test;
    };
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;
};

/// Deterministic stratified k-fold split: test folds are disjoint, cover
/// all rows, and hold each class's share within one sample.
FoldPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

/// Same-size resample of `source`, drawn uniformly with replacement.
IndexSet bootstrap(const IndexSet& source, std::uint64_t seed);

/// {0, 1, ..., n-1}.
IndexSet all_rows(int n);

/// Materializes the rows of `rows` as a standalone dataset (class count
/// and token map are inherited even if a class is absent in the subset).
Dataset subset(const Dataset& ds, const IndexSet& rows);

/// Per-feature z-score transform fitted on training rows only.
/// Zero-variance features keep scale 1 so training values map to 0.
struct Normalizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Normalizer fit(const Eigen::MatrixXd& features, const IndexSet& rows);
    Eigen::RowVectorXd apply(const Eigen::RowVectorXd& x) const;
    Eigen::MatrixXd apply_matrix(const Eigen::MatrixXd& x) const;
};

}  // namespace hetforest
