#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace oracles {

/// Cyclic Jacobi eigensolver for symmetric matrices; eigenvalues
/// ascending, eigenvectors as columns.
inline void jacobi_eigen(Eigen::MatrixXd A, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const int n = static_cast<int>(A.rows());
    vectors = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        }
        if (std::sqrt(off) < 1e-15 * scale * n) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vectors(i, p), viq = vectors(i, q);
                    vectors(i, p) = c * vip - s * viq;
                    vectors(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    values.resize(n);
    for (int i = 0; i < n; ++i) values[i] = A(i, i);
    // Sort ascending.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    Eigen::VectorXd sorted_values(n);
    Eigen::MatrixXd sorted_vectors(n, n);
    for (int i = 0; i < n; ++i) {
        sorted_values[i] = values[order[i]];
        sorted_vectors.col(i) = vectors.col(order[i]);
    }
    values = sorted_values;
    vectors = sorted_vectors;
}

struct GenEig {
    double value;
    Eigen::VectorXd vector;
};

/// Brute-force generalized eigensolver for G z = lambda H z (H PD):
/// whitens with H^(-1/2) built from a Jacobi eigendecomposition.
inline GenEig generalized_eig_oracle(const Eigen::MatrixXd& G, const Eigen::MatrixXd& H,
                                     bool want_min) {
    Eigen::VectorXd h_values;
    Eigen::MatrixXd h_vectors;
    jacobi_eigen(H, h_values, h_vectors);
    Eigen::MatrixXd inv_sqrt = Eigen::MatrixXd::Zero(H.rows(), H.cols());
    for (int i = 0; i < h_values.size(); ++i) {
        inv_sqrt += h_vectors.col(i) * h_vectors.col(i).transpose() / std::sqrt(h_values[i]);
    }
    Eigen::MatrixXd S = inv_sqrt * G * inv_sqrt;
    S = (S + S.transpose()) / 2.0;
    Eigen::VectorXd s_values;
    Eigen::MatrixXd s_vectors;
    jacobi_eigen(S, s_values, s_vectors);
    const int pick = want_min ? 0 : static_cast<int>(s_values.size()) - 1;
    GenEig out;
    out.value = s_values[pick];
    out.vector = inv_sqrt * s_vectors.col(pick);
    out.vector.normalize();
    return out;
}

/// Gradient descent on ||Xw + b - y||^2 + lambda ||w||^2 with the offset
/// unpenalized, run to tight tolerance.
inline Eigen::VectorXd ridge_gd_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       double lambda) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    Eigen::MatrixXd Xa(n, m + 1);
    Xa.leftCols(m) = X;
    Xa.col(m).setOnes();

    // Lipschitz bound for the gradient via the trace.
    const double L = 2.0 * ((Xa.transpose() * Xa).trace() + lambda) + 1.0;
    const double step = 1.0 / L;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);
    for (int it = 0; it < 2000000; ++it) {
        Eigen::VectorXd residual = Xa * beta - y;
        Eigen::VectorXd grad = 2.0 * (Xa.transpose() * residual);
        grad.head(m) += 2.0 * lambda * beta.head(m);
        beta -= step * grad;
        if (grad.norm() < 1e-12) break;
    }
    return beta;  // (w, b)
}

/// Coarse lattice minimum of the linear SVM primal objective.
inline double svm_grid_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                              double radius, int steps) {
    const Eigen::Index n = X.rows();
    auto objective = [&](double w0, double w1, double b) {
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            hinge += std::max(0.0, 1.0 - y[i] * (w0 * X(i, 0) + w1 * X(i, 1) + b));
        }
        return 0.5 * (w0 * w0 + w1 * w1) + C * hinge;
    };
    double best = std::numeric_limits<double>::infinity();
    const double h = 2.0 * radius / steps;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            for (int k = 0; k <= steps; ++k) {
                best = std::min(best, objective(-radius + i * h, -radius + j * h,
                                                -radius + k * h));
            }
        }
    }
    return best;
}

/// LSSVM via the (n+1)-dimensional dual KKT system with a linear kernel.
inline std::pair<Eigen::VectorXd, double> lssvm_dual_oracle(const Eigen::MatrixXd& X,
                                                            const Eigen::VectorXd& y, double C) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K = X * X.transpose();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
    M.block(1, 1, n, n) = K + Eigen::MatrixXd::Identity(n, n) / C;
    M.block(1, 0, n, 1).setOnes();
    M.block(0, 1, 1, n).setOnes();
    Eigen::VectorXd rhs(n + 1);
    rhs[0] = 0.0;
    rhs.tail(n) = y;
    Eigen::VectorXd solution = M.fullPivLu().solve(rhs);
    const double b = solution[0];
    Eigen::VectorXd alpha = solution.tail(n);
    return {X.transpose() * alpha, b};
}

inline double gini_of_counts(const std::vector<long long>& counts) {
    long long total = 0;
    for (long long c : counts) total += c;
    double sum_sq = 0.0;
    for (long long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct AxisOracleResult {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

/// Fully naive split search: every feature, every midpoint between
/// consecutive distinct sorted values, impurity recomputed from scratch.
inline std::optional<AxisOracleResult> axis_split_oracle(const Eigen::MatrixXd& features,
                                                         const std::vector<int>& rows,
                                                         const std::vector<int>& labels,
                                                         const std::vector<int>& subset) {
    int k = 0;
    for (int r : rows) k = std::max(k, labels[r] + 1);
    AxisOracleResult best;
    for (int feature : subset) {
        std::vector<double> values;
        for (int r : rows) values.push_back(features(r, feature));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = (values[i] + values[i + 1]) / 2.0;
            std::vector<long long> left(k, 0), right(k, 0);
            long long n_left = 0, n_right = 0;
            for (int r : rows) {
                if (features(r, feature) <= threshold) {
                    ++left[labels[r]];
                    ++n_left;
                } else {
                    ++right[labels[r]];
                    ++n_right;
                }
            }
            if (n_left == 0 || n_right == 0) continue;
            const double impurity =
                (static_cast<double>(n_left) * gini_of_counts(left) +
                 static_cast<double>(n_right) * gini_of_counts(right)) /
                static_cast<double>(n_left + n_right);
            if (impurity < best.impurity ||
                (impurity == best.impurity &&
                 (feature < best.feature ||
                  (feature == best.feature && threshold < best.threshold)))) {
                best.feature = feature;
                best.threshold = threshold;
                best.impurity = impurity;
            }
        }
    }
    if (best.feature < 0) return std::nullopt;
    return best;
}

}  // namespace oracles
