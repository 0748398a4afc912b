#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hetforest/dataset.hpp"
#include "hetforest/linear_models.hpp"

namespace hetforest {

/// Assignment of a node's classes into two hyperclasses. Canonical form:
/// both sides sorted ascending and the smallest class index in `pos`.
struct BinaryPartition {
    std::vector<int> pos;
    std::vector<int> neg;

    bool operator==(const BinaryPartition& other) const = default;
};

/// Sorts both sides and swaps them if needed so the smallest class index
/// lands in pos.
void canonicalize(BinaryPartition& p);

struct PartitionScore {
    BinaryPartition partition;
    double separability = 0.0;  // Bhattacharyya distance between group Gaussians
    double ideal_gini = 0.0;    // weighted child Gini under a perfect hyperclass separator
};

/// Mean and population covariance of the selected rows over the feature
/// subset. Small samples (n < m + 2) and rank-deficient covariances fall
/// back to diag(cov) + eps I with eps = 1e-6 * max(trace/m, 1).
GaussianSummary gaussian_summary(const Eigen::MatrixXd& features, const IndexSet& rows,
                                 const std::vector<int>& feature_subset);

/// Bhattacharyya distance between two Gaussian summaries:
/// 1/8 d' M^-1 d + 1/2 ln(|M| / sqrt(|S1||S2|)) with M = (S1 + S2) / 2.
double bhattacharyya(const GaussianSummary& g1, const GaussianSummary& g2);

/// Seeds the two hyperclasses with the class pair of largest pairwise
/// Bhattacharyya distance and assigns every other class to the nearer
/// seed (ties to pos). Output is canonical.
BinaryPartition bhattacharyya_partition(const Eigen::MatrixXd& features, const IndexSet& rows,
                                        const std::vector<int>& labels,
                                        const std::vector<int>& feature_subset);

/// All 2^(K-1) - 1 canonical two-sided partitions of the given classes;
/// requires 2 <= K <= 8.
std::vector<BinaryPartition> enumerate_partitions(const std::vector<int>& classes_present);

/// Scores candidates by ideal Gini (ascending) with separability
/// (descending) and lexicographic-pos tie-breaks; returns the best top_m.
std::vector<PartitionScore> rank_partitions(const std::vector<BinaryPartition>& candidates,
                                            const Eigen::MatrixXd& features, const IndexSet& rows,
                                            const std::vector<int>& labels,
                                            const std::vector<int>& feature_subset, int top_m);

struct GaParams {
    int population = 32;
    int generations = 30;
    double crossover_rate = 0.9;
    int elitism = 2;
    // per-bit mutation rate is 1/K
};

/// Genetic search over class bit-strings for K > 8; fitness is the
/// rank_partitions score. Returns up to top_m distinct canonical
/// partitions, Bhattacharyya partition always included.
std::vector<BinaryPartition> ga_partition_search(const Eigen::MatrixXd& features,
                                                 const IndexSet& rows,
                                                 const std::vector<int>& labels,
                                                 const std::vector<int>& feature_subset,
                                                 const GaParams& params, std::uint64_t seed,
                                                 int top_m);

/// Candidate set for the heterogeneous split search: enumeration for
/// K <= 8, GA above, ranked, with the Bhattacharyya partition forced in
/// (replacing the worst candidate when it did not rank).
std::vector<BinaryPartition> candidate_partitions(const Eigen::MatrixXd& features,
                                                  const IndexSet& rows,
                                                  const std::vector<int>& labels,
                                                  const std::vector<int>& feature_subset,
                                                  int top_m, std::uint64_t seed);

/// Distinct class indices present among the rows, ascending.
std::vector<int> classes_present(const IndexSet& rows, const std::vector<int>& labels);

}  // namespace hetforest
