#pragma once

// Deterministic synthetic datasets for tests and the acceptance suite.

#include <cmath>
#include <string>
#include <vector>

#include "hetforest/dataset.hpp"
#include "hetforest/random.hpp"

namespace synth {

class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double next() {
        const double u1 = rng_.next_unit();
        const double u2 = rng_.next_unit();
        return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
    }

    double uniform() { return rng_.next_unit(); }

private:
    hetforest::SplitMix64 rng_;
};

inline hetforest::Dataset finish(Eigen::MatrixXd features, std::vector<int> labels, int k,
                                 const std::string& name) {
    hetforest::Dataset ds;
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    ds.class_count = k;
    for (int c = 0; c < k; ++c) ds.label_tokens.push_back(std::string(1, static_cast<char>('a' + c)));
    ds.name = name;
    ds.validate();
    return ds;
}

/// Gaussian blobs, one per class.
inline hetforest::Dataset make_blobs(const std::vector<Eigen::VectorXd>& means, int per_class,
                                     double sigma, std::uint64_t seed,
                                     const std::string& name = "blobs") {
    const int k = static_cast<int>(means.size());
    const int f = static_cast<int>(means[0].size());
    Gaussian g(seed);
    Eigen::MatrixXd features(per_class * k, f);
    std::vector<int> labels(per_class * k);
    int row = 0;
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < per_class; ++i, ++row) {
            for (int j = 0; j < f; ++j) features(row, j) = means[c][j] + sigma * g.next();
            labels[row] = c;
        }
    }
    return finish(std::move(features), std::move(labels), k, name);
}

/// Four clusters in the XOR arrangement: (0,0) and (1,1) against
/// (0,1) and (1,0).
inline hetforest::Dataset make_xor(int total, double noise, std::uint64_t seed) {
    Gaussian g(seed);
    const int per_cluster = total / 4;
    Eigen::MatrixXd features(per_cluster * 4, 2);
    std::vector<int> labels(per_cluster * 4);
    const double centers[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    int row = 0;
    for (int cluster = 0; cluster < 4; ++cluster) {
        for (int i = 0; i < per_cluster; ++i, ++row) {
            features(row, 0) = centers[cluster][0] + noise * g.next();
            features(row, 1) = centers[cluster][1] + noise * g.next();
            labels[row] = cluster < 2 ? 0 : 1;
        }
    }
    return finish(std::move(features), std::move(labels), 2, "xor");
}

/// Two concentric rings.
inline hetforest::Dataset make_rings(int total, double noise, std::uint64_t seed) {
    Gaussian g(seed);
    const int per_class = total / 2;
    Eigen::MatrixXd features(per_class * 2, 2);
    std::vector<int> labels(per_class * 2);
    int row = 0;
    for (int c = 0; c < 2; ++c) {
        const double radius = c == 0 ? 1.0 : 2.0;
        for (int i = 0; i < per_class; ++i, ++row) {
            const double angle = 2.0 * M_PI * g.uniform();
            const double r = radius + noise * g.next();
            features(row, 0) = r * std::cos(angle);
            features(row, 1) = r * std::sin(angle);
            labels[row] = c;
        }
    }
    return finish(std::move(features), std::move(labels), 2, "rings");
}

/// Two classes separated along the all-ones diagonal of an f-dimensional
/// space with strong common variance, so single-feature cuts are weak.
inline hetforest::Dataset make_diagonal(int per_class, int f, double separation, double noise,
                                        std::uint64_t seed) {
    Gaussian g(seed);
    Eigen::MatrixXd features(per_class * 2, f);
    std::vector<int> labels(per_class * 2);
    const double unit = 1.0 / std::sqrt(static_cast<double>(f));
    int row = 0;
    for (int c = 0; c < 2; ++c) {
        const double offset = (c == 0 ? -0.5 : 0.5) * separation;
        for (int i = 0; i < per_class; ++i, ++row) {
            const double shared = g.next();  // common factor across features
            for (int j = 0; j < f; ++j) {
                features(row, j) = offset * unit + 0.9 * shared + noise * g.next();
            }
            labels[row] = c;
        }
    }
    return finish(std::move(features), std::move(labels), 2, "diagonal");
}

/// Three stripes perpendicular to the all-ones direction in 3-D.
inline hetforest::Dataset make_bands(int per_class, std::uint64_t seed) {
    Gaussian g(seed);
    Eigen::MatrixXd features(per_class * 3, 3);
    std::vector<int> labels(per_class * 3);
    int row = 0;
    for (int c = 0; c < 3; ++c) {
        const double center = static_cast<double>(c - 1) * 1.2;
        for (int i = 0; i < per_class; ++i, ++row) {
            const double along = center + 0.25 * g.next();
            const double t1 = 2.0 * g.uniform() - 1.0;
            const double t2 = 2.0 * g.uniform() - 1.0;
            // Basis: diagonal direction plus two transverse directions.
            features(row, 0) = along + t1;
            features(row, 1) = along - t1 + t2;
            features(row, 2) = along - t2;
            labels[row] = c;
        }
    }
    return finish(std::move(features), std::move(labels), 3, "bands");
}

/// Nine classes forming two tight, well-separated super-clusters
/// (classes 0..3 around one center, 4..8 around the other).
inline hetforest::Dataset make_two_superclusters(int per_class, std::uint64_t seed) {
    Gaussian g(seed);
    const int k = 9;
    Eigen::MatrixXd features(per_class * k, 2);
    std::vector<int> labels(per_class * k);
    int row = 0;
    for (int c = 0; c < k; ++c) {
        const bool left_group = c < 4;
        const double cx = left_group ? -10.0 + 0.6 * (c % 4) : 10.0 + 0.6 * (c % 5);
        const double cy = left_group ? 0.4 * (c % 2) : 0.4 * (c % 3);
        for (int i = 0; i < per_class; ++i, ++row) {
            features(row, 0) = cx + 0.3 * g.next();
            features(row, 1) = cy + 0.3 * g.next();
            labels[row] = c;
        }
    }
    return finish(std::move(features), std::move(labels), k, "superclusters");
}

/// The five-dataset roster used by the structural and accuracy checks.
inline std::vector<hetforest::Dataset> benchmark_suite(std::uint64_t seed) {
    std::vector<Eigen::VectorXd> blob_means;
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd mu(4);
        mu << (c == 0 ? 2.0 : c == 1 ? -2.0 : 0.0), (c == 2 ? 2.5 : 0.0),
            (c == 1 ? 1.5 : -0.5), 0.8 * c;
        blob_means.push_back(mu);
    }
    std::vector<hetforest::Dataset> suite;
    suite.push_back(make_blobs(blob_means, 100, 1.6, hetforest::derive_seed(seed, 1), "blobs3"));
    suite.push_back(make_xor(400, 0.15, hetforest::derive_seed(seed, 2)));
    suite.push_back(make_rings(400, 0.18, hetforest::derive_seed(seed, 3)));
    suite.push_back(make_diagonal(150, 6, 1.8, 0.35, hetforest::derive_seed(seed, 4)));
    suite.push_back(make_bands(120, hetforest::derive_seed(seed, 5)));
    return suite;
}

}  // namespace synth
