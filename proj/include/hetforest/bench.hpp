#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetforest/forest.hpp"
#include "hetforest/stats.hpp"

namespace hetforest {

/// Per-variant hyperparameter overrides allowed in a bench spec.
struct VariantOverrides {
    std::optional<int> ntree;
    std::optional<int> minleaf;
    std::optional<int> mtry;
    std::optional<int> top_m;
    std::optional<double> ridge_lambda;
    std::optional<double> svm_c;
    std::optional<double> lssvm_c;
    std::optional<double> mpsvm_delta;
};

struct BenchSpec {
    std::vector<std::string> dataset_paths;
    std::vector<Variant> variants;
    int ntree = 50;
    int folds = 5;
    int repetitions = 1;
    std::uint64_t seed = 42;
    bool normalize = true;
    int minleaf = 1;
    int mtry = 0;  // 0 = sqrt rule
    int top_m = 0;
    double ridge_lambda = 0.1;
    double svm_c = 1.0;
    double lssvm_c = 1.0;
    double mpsvm_delta = 0.01;
    std::map<std::string, VariantOverrides> overrides;  // keyed by variant name
};

/// Reads a bench spec from JSON or TOML (decided by content, not
/// extension: a leading '{' means JSON).
BenchSpec load_bench_spec(const std::string& path);

struct ResultRecord {
    std::string dataset;
    std::string variant;
    int rep = 0;
    int fold = 0;
    double accuracy = 0.0;
    double train_seconds = 0.0;
    double mean_nodes = 0.0;
};

/// Stable, versioned-by-header results schema.
extern const char* const kResultsCsvHeader;

std::vector<ResultRecord> read_results_csv(const std::string& path);
std::string format_record(const ResultRecord& r);

struct BenchOutcome {
    int completed = 0;
    int skipped = 0;  // already present in the output file
    std::vector<std::string> failed_datasets;
    int attempted_datasets = 0;
};

/// Runs every (dataset, variant, repetition, fold) cell with stratified
/// folds, appending one record per cell to `out_csv`. Existing records
/// are kept and their keys skipped, so an interrupted run resumes
/// without duplicates. Dataset load failures are reported through
/// `log` and skipped.
BenchOutcome run_bench(const BenchSpec& spec, const std::string& out_csv,
                       const std::function<void(const std::string&)>& log = {});

/// Mean accuracy per (variant, dataset) over reps and folds, as the
/// rank-engine input. Throws DataError listing any missing pair.
ResultsMatrix results_to_matrix(const std::vector<ResultRecord>& records);

}  // namespace hetforest
