#include "hetforest/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hetforest/linalg.hpp"
#include "hetforest/random.hpp"

namespace hetforest {

namespace {

/// Log-determinant via Cholesky; throws NumericError when not PD.
double logdet_spd(const Eigen::MatrixXd& M) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw NumericError("logdet: matrix not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

struct Score {
    double ideal_gini = 0.0;
    double separability = 0.0;
};

/// Total order used everywhere partitions compete: lower ideal Gini,
/// then higher separability, then lexicographically smaller pos side.
bool better(const Score& a, const BinaryPartition& pa, const Score& b,
            const BinaryPartition& pb) {
    if (a.ideal_gini != b.ideal_gini) return a.ideal_gini < b.ideal_gini;
    if (a.separability != b.separability) return a.separability > b.separability;
    return pa.pos < pb.pos;
}

class PartitionScorer {
public:
    PartitionScorer(const Eigen::MatrixXd& features, const IndexSet& rows,
                    const std::vector<int>& labels, const std::vector<int>& feature_subset)
        : features_(features), labels_(labels), subset_(feature_subset) {
        for (int r : rows) class_rows_[labels[r]].push_back(r);
    }

    Score score(const BinaryPartition& p) const {
        auto memo = memo_.find(p.pos);
        if (memo != memo_.end()) return memo->second;

        IndexSet pos_rows = gather(p.pos);
        IndexSet neg_rows = gather(p.neg);
        Score s;
        s.ideal_gini = ideal_gini(pos_rows, neg_rows);
        GaussianSummary gp = gaussian_summary(features_, pos_rows, subset_);
        GaussianSummary gf = gaussian_summary(features_, neg_rows, subset_);
        s.separability = bhattacharyya(gp, gf);
        memo_.emplace(p.pos, s);
        return s;
    }

    const std::map<int, IndexSet>& class_rows() const { return class_rows_; }

private:
    IndexSet gather(const std::vector<int>& classes) const {
        IndexSet out;
        for (int c : classes) {
            auto it = class_rows_.find(c);
            if (it != class_rows_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        }
        return out;
    }

    /// Weighted child Gini over the original class labels that a perfect
    /// hyperclass separator would achieve.
    double ideal_gini(const IndexSet& pos_rows, const IndexSet& neg_rows) const {
        auto side_gini = [this](const IndexSet& rows) {
            std::map<int, int> counts;
            for (int r : rows) ++counts[labels_[r]];
            const double n = static_cast<double>(rows.size());
            double sum_sq = 0.0;
            for (const auto& [cls, count] : counts) {
                const double p = static_cast<double>(count) / n;
                sum_sq += p * p;
            }
            return 1.0 - sum_sq;
        };
        const double n_pos = static_cast<double>(pos_rows.size());
        const double n_neg = static_cast<double>(neg_rows.size());
        const double total = n_pos + n_neg;
        return (n_pos * side_gini(pos_rows) + n_neg * side_gini(neg_rows)) / total;
    }

    const Eigen::MatrixXd& features_;
    const std::vector<int>& labels_;
    const std::vector<int>& subset_;
    std::map<int, IndexSet> class_rows_;
    mutable std::map<std::vector<int>, Score> memo_;
};

BinaryPartition partition_from_bits(const std::vector<int>& classes,
                                    const std::vector<std::uint8_t>& bits) {
    BinaryPartition p;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        (bits[i] ? p.pos : p.neg).push_back(classes[i]);
    }
    canonicalize(p);
    return p;
}

}  // namespace

void canonicalize(BinaryPartition& p) {
    std::sort(p.pos.begin(), p.pos.end());
    std::sort(p.neg.begin(), p.neg.end());
    if (p.pos.empty() || p.neg.empty()) return;
    if (p.neg.front() < p.pos.front()) std::swap(p.pos, p.neg);
}

std::vector<int> classes_present(const IndexSet& rows, const std::vector<int>& labels) {
    std::vector<int> out;
    for (int r : rows) out.push_back(labels[r]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GaussianSummary gaussian_summary(const Eigen::MatrixXd& features, const IndexSet& rows,
                                 const std::vector<int>& feature_subset) {
    if (rows.empty()) throw std::invalid_argument("gaussian_summary: empty row set");
    const int m = static_cast<int>(feature_subset.size());
    const double n = static_cast<double>(rows.size());

    GaussianSummary g;
    g.count = static_cast<int>(rows.size());
    g.mean = Eigen::VectorXd::Zero(m);
    for (int r : rows) {
        for (int j = 0; j < m; ++j) g.mean[j] += features(r, feature_subset[j]);
    }
    g.mean /= n;

    g.cov = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd d(m);
    for (int r : rows) {
        for (int j = 0; j < m; ++j) d[j] = features(r, feature_subset[j]) - g.mean[j];
        g.cov += d * d.transpose();
    }
    g.cov /= n;

    bool degenerate = g.count < m + 2;
    if (!degenerate) degenerate = symmetric_rank(g.cov) < m;
    if (degenerate) {
        const double eps = 1e-6 * std::max(g.cov.trace() / static_cast<double>(m), 1.0);
        Eigen::VectorXd diag = g.cov.diagonal();
        g.cov = diag.asDiagonal();
        g.cov += eps * Eigen::MatrixXd::Identity(m, m);
    }
    return g;
}

double bhattacharyya(const GaussianSummary& g1, const GaussianSummary& g2) {
    if (g1.mean.size() != g2.mean.size()) {
        throw std::invalid_argument("bhattacharyya: dimension mismatch");
    }
    const Eigen::MatrixXd mid = (g1.cov + g2.cov) / 2.0;
    const Eigen::VectorXd diff = g2.mean - g1.mean;
    const Eigen::VectorXd solved = solve_spd(mid, diff);
    const double mahalanobis = diff.dot(solved) / 8.0;
    const double volume =
        0.5 * (logdet_spd(mid) - 0.5 * logdet_spd(g1.cov) - 0.5 * logdet_spd(g2.cov));
    return mahalanobis + volume;
}

BinaryPartition bhattacharyya_partition(const Eigen::MatrixXd& features, const IndexSet& rows,
                                        const std::vector<int>& labels,
                                        const std::vector<int>& feature_subset) {
    const std::vector<int> classes = classes_present(rows, labels);
    const int k = static_cast<int>(classes.size());
    if (k < 2) throw std::invalid_argument("bhattacharyya_partition: single-class node");

    std::map<int, IndexSet> by_class;
    for (int r : rows) by_class[labels[r]].push_back(r);
    std::vector<GaussianSummary> summaries;
    summaries.reserve(k);
    for (int c : classes) summaries.push_back(gaussian_summary(features, by_class[c], feature_subset));

    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(k, k);
    int seed_a = 0, seed_b = 1;
    double best = -1.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            dist(i, j) = dist(j, i) = bhattacharyya(summaries[i], summaries[j]);
            if (dist(i, j) > best) {
                best = dist(i, j);
                seed_a = i;
                seed_b = j;
            }
        }
    }

    BinaryPartition p;
    p.pos.push_back(classes[seed_a]);
    p.neg.push_back(classes[seed_b]);
    for (int i = 0; i < k; ++i) {
        if (i == seed_a || i == seed_b) continue;
        // Nearer seed wins; ties go to the pos side.
        (dist(i, seed_a) <= dist(i, seed_b) ? p.pos : p.neg).push_back(classes[i]);
    }
    canonicalize(p);
    return p;
}

std::vector<BinaryPartition> enumerate_partitions(const std::vector<int>& classes_present) {
    const int k = static_cast<int>(classes_present.size());
    if (k < 2) throw std::invalid_argument("enumerate_partitions: need at least 2 classes");
    if (k > 8) throw std::invalid_argument("enumerate_partitions: K > 8, use the GA search");

    std::vector<int> sorted = classes_present;
    std::sort(sorted.begin(), sorted.end());

    std::vector<BinaryPartition> out;
    const std::uint32_t combinations = 1u << (k - 1);
    // The smallest class is pinned to pos; masks pick pos-mates among the
    // rest. The all-ones mask would leave neg empty.
    for (std::uint32_t mask = 0; mask + 1 < combinations; ++mask) {
        BinaryPartition p;
        p.pos.push_back(sorted[0]);
        for (int i = 1; i < k; ++i) {
            ((mask >> (i - 1)) & 1u ? p.pos : p.neg).push_back(sorted[i]);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PartitionScore> rank_partitions(const std::vector<BinaryPartition>& candidates,
                                            const Eigen::MatrixXd& features, const IndexSet& rows,
                                            const std::vector<int>& labels,
                                            const std::vector<int>& feature_subset, int top_m) {
    if (candidates.empty()) throw std::invalid_argument("rank_partitions: no candidates");
    PartitionScorer scorer(features, rows, labels, feature_subset);

    std::vector<PartitionScore> scored;
    scored.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        BinaryPartition p = candidate;
        canonicalize(p);
        Score s = scorer.score(p);
        scored.push_back({std::move(p), s.separability, s.ideal_gini});
    }
    std::sort(scored.begin(), scored.end(), [](const PartitionScore& a, const PartitionScore& b) {
        return better({a.ideal_gini, a.separability}, a.partition,
                      {b.ideal_gini, b.separability}, b.partition);
    });
    if (top_m > 0 && static_cast<int>(scored.size()) > top_m) scored.resize(top_m);
    return scored;
}

std::vector<BinaryPartition> ga_partition_search(const Eigen::MatrixXd& features,
                                                 const IndexSet& rows,
                                                 const std::vector<int>& labels,
                                                 const std::vector<int>& feature_subset,
                                                 const GaParams& params, std::uint64_t seed,
                                                 int top_m) {
    const std::vector<int> classes = classes_present(rows, labels);
    const int k = static_cast<int>(classes.size());
    if (k <= 8) throw std::invalid_argument("ga_partition_search: K <= 8, use enumeration");

    PartitionScorer scorer(features, rows, labels, feature_subset);
    SplitMix64 rng(seed);
    using Bits = std::vector<std::uint8_t>;

    auto repair = [&](Bits& bits) {
        bool any_one = false, any_zero = false;
        for (auto b : bits) (b ? any_one : any_zero) = true;
        if (!any_one || !any_zero) {
            bits[rng.next_below(static_cast<std::uint64_t>(k))] ^= 1u;
        }
    };

    auto fitness = [&](const Bits& bits) {
        BinaryPartition p = partition_from_bits(classes, bits);
        Score s = scorer.score(p);
        return std::pair<BinaryPartition, Score>(std::move(p), s);
    };

    struct Individual {
        Bits bits;
        BinaryPartition partition;
        Score score;
    };
    auto make_individual = [&](Bits bits) {
        repair(bits);
        auto [p, s] = fitness(bits);
        return Individual{std::move(bits), std::move(p), s};
    };
    auto fitter = [](const Individual& a, const Individual& b) {
        return better(a.score, a.partition, b.score, b.partition);
    };

    std::vector<Individual> population;
    population.reserve(params.population);
    for (int i = 0; i < params.population; ++i) {
        Bits bits(k);
        for (int j = 0; j < k; ++j) bits[j] = static_cast<std::uint8_t>(rng.next() & 1u);
        population.push_back(make_individual(std::move(bits)));
    }

    const double mutation_rate = 1.0 / static_cast<double>(k);
    for (int gen = 0; gen < params.generations; ++gen) {
        std::vector<Individual> next;
        next.reserve(params.population);

        // Elites survive unchanged.
        std::vector<int> order(population.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return fitter(population[a], population[b]);
        });
        for (int e = 0; e < params.elitism && e < static_cast<int>(order.size()); ++e) {
            next.push_back(population[order[e]]);
        }

        auto tournament = [&]() -> const Individual& {
            const auto& a = population[rng.next_below(population.size())];
            const auto& b = population[rng.next_below(population.size())];
            return fitter(a, b) ? a : b;
        };

        while (static_cast<int>(next.size()) < params.population) {
            Bits child_a = tournament().bits;
            Bits child_b = tournament().bits;
            if (rng.next_unit() < params.crossover_rate && k > 1) {
                const int point = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k - 1)));
                for (int j = point; j < k; ++j) std::swap(child_a[j], child_b[j]);
            }
            for (Bits* child : {&child_a, &child_b}) {
                for (int j = 0; j < k; ++j) {
                    if (rng.next_unit() < mutation_rate) (*child)[j] ^= 1u;
                }
                if (static_cast<int>(next.size()) < params.population) {
                    next.push_back(make_individual(std::move(*child)));
                }
            }
        }
        population = std::move(next);
    }

    // Rank the distinct partitions of the final population together with
    // the Bhattacharyya partition, which is always a candidate.
    std::vector<Individual> finalists = population;
    {
        BinaryPartition bp = bhattacharyya_partition(features, rows, labels, feature_subset);
        Score s = scorer.score(bp);
        finalists.push_back(Individual{{}, std::move(bp), s});
    }
    std::stable_sort(finalists.begin(), finalists.end(), fitter);

    std::vector<BinaryPartition> out;
    for (const auto& ind : finalists) {
        if (std::find(out.begin(), out.end(), ind.partition) == out.end()) {
            out.push_back(ind.partition);
        }
        if (top_m > 0 && static_cast<int>(out.size()) >= top_m) break;
    }
    // The Bhattacharyya partition stays in even when it ranks below the cut.
    {
        BinaryPartition bp = bhattacharyya_partition(features, rows, labels, feature_subset);
        if (std::find(out.begin(), out.end(), bp) == out.end()) {
            out.back() = std::move(bp);
        }
    }
    return out;
}

std::vector<BinaryPartition> candidate_partitions(const Eigen::MatrixXd& features,
                                                  const IndexSet& rows,
                                                  const std::vector<int>& labels,
                                                  const std::vector<int>& feature_subset,
                                                  int top_m, std::uint64_t seed) {
    const std::vector<int> classes = classes_present(rows, labels);
    const int k = static_cast<int>(classes.size());
    if (k < 2) throw std::invalid_argument("candidate_partitions: single-class node");
    if (top_m <= 0) top_m = k;

    if (k > 8) {
        return ga_partition_search(features, rows, labels, feature_subset, GaParams{}, seed, top_m);
    }

    std::vector<PartitionScore> ranked =
        rank_partitions(enumerate_partitions(classes), features, rows, labels, feature_subset, top_m);
    std::vector<BinaryPartition> out;
    out.reserve(ranked.size());
    for (auto& ps : ranked) out.push_back(std::move(ps.partition));

    BinaryPartition bp = bhattacharyya_partition(features, rows, labels, feature_subset);
    if (std::find(out.begin(), out.end(), bp) == out.end()) {
        out.back() = std::move(bp);
    }
    return out;
}

}  // namespace hetforest
