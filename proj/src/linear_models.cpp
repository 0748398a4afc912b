#include "hetforest/linear_models.hpp"

#include <cmath>

#include "hetforest/linalg.hpp"

namespace hetforest {

namespace {

constexpr double kZeroDirectionTol = 1e-12;

void require_both_signs(const Eigen::VectorXd& y) {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] > 0) pos = true;
        else neg = true;
    }
    if (!pos || !neg) throw FitError("targets carry a single sign");
}

Hyperplane make_plane(Eigen::VectorXd w, double b) {
    if (!w.allFinite() || !std::isfinite(b)) throw FitError("non-finite plane");
    if (w.norm() <= kZeroDirectionTol) throw FitError("zero direction: invalid plane");
    Hyperplane plane;
    plane.w = std::move(w);
    plane.b = b;
    return plane;
}

/// Ridge normal equations with the offset column unpenalized.
Hyperplane solve_augmented_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double lambda) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    Eigen::MatrixXd M(m + 1, m + 1);
    M.topLeftCorner(m, m) = X.transpose() * X + lambda * Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd col_sums = X.colwise().sum().transpose();
    M.topRightCorner(m, 1) = col_sums;
    M.bottomLeftCorner(1, m) = col_sums.transpose();
    M(m, m) = static_cast<double>(n);
    Eigen::VectorXd rhs(m + 1);
    rhs.head(m) = X.transpose() * y;
    rhs[m] = y.sum();

    Eigen::VectorXd beta;
    try {
        beta = solve_spd(M, rhs);
    } catch (const NumericError& e) {
        throw FitError(std::string("degenerate normal system: ") + e.what());
    }
    return make_plane(beta.head(m), beta[m]);
}

/// z'Mz for the augmented direction z = (w, b).
double quad_form(const Eigen::MatrixXd& M, const Eigen::VectorXd& z) {
    return z.dot(M * z);
}

/// Augmented second-moment matrix [A 1]'[A 1].
Eigen::MatrixXd augmented_moment(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = A.cols();
    Eigen::MatrixXd M(m + 1, m + 1);
    M.topLeftCorner(m, m) = A.transpose() * A;
    Eigen::VectorXd col_sums = A.colwise().sum().transpose();
    M.topRightCorner(m, 1) = col_sums;
    M.bottomLeftCorner(1, m) = col_sums.transpose();
    M(m, m) = static_cast<double>(n);
    return M;
}

/// Direction minimizing z'Nz / z'Dz, honoring the regularization mode.
Eigen::VectorXd proximal_direction(const Eigen::MatrixXd& N, const Eigen::MatrixXd& D,
                                   MpsvmMode mode, double delta) {
    const Eigen::Index dim = N.rows();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);

    switch (mode) {
        case MpsvmMode::kTikhonov: {
            try {
                return generalized_eig_extreme(N, D + delta * identity, EigWhich::kMin).vector;
            } catch (const NumericError&) {
                // Numerator regularization as the second resort.
                return generalized_eig_extreme(N + delta * identity, D + delta * identity,
                                               EigWhich::kMin)
                    .vector;
            }
        }
        case MpsvmMode::kNullspace: {
            if (symmetric_rank(D) == static_cast<int>(dim)) {
                return generalized_eig_extreme(N, D, EigWhich::kMin).vector;
            }
            Eigen::MatrixXd Q = nullspace_basis(D);
            if (Q.cols() == 0) throw FitError("nullspace mode: empty null space");
            Eigen::MatrixXd small = Q.transpose() * N * Q;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(small);
            if (solver.info() != Eigen::Success) {
                throw FitError("nullspace mode: eigensolver failed");
            }
            Eigen::VectorXd z = Q * solver.eigenvectors().col(0);
            z.normalize();
            apply_sign_convention(z);
            return z;
        }
        case MpsvmMode::kRaw: {
            if (symmetric_rank(D) < static_cast<int>(dim)) {
                throw RankDeficiencyError("raw mode: denominator matrix is rank deficient");
            }
            return generalized_eig_extreme(N, D, EigWhich::kMin).vector;
        }
    }
    throw FitError("unknown MPSVM mode");
}

}  // namespace

double Hyperplane::decision(const Eigen::RowVectorXd& x) const {
    double acc = b;
    if (feature_map.empty()) {
        acc += w.dot(x.transpose());
    } else {
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            acc += w[j] * x[feature_map[static_cast<std::size_t>(j)]];
        }
    }
    return acc;
}

bool Hyperplane::valid() const {
    return w.size() > 0 && w.allFinite() && std::isfinite(b) && w.norm() > kZeroDirectionTol;
}

Hyperplane fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    require_both_signs(y);
    return solve_augmented_ridge(X, y, lambda);
}

Hyperplane fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    require_both_signs(y);
    const double m = static_cast<double>(X.cols());
    const double jitter = 1e-8 * (X.transpose() * X).trace() / m;
    return solve_augmented_ridge(X, y, jitter);
}

Hyperplane fit_lda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (!X.allFinite()) throw FitError("non-finite input to fit_lda");
    const Eigen::Index m = X.cols();
    Eigen::VectorXd mu_pos = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd mu_neg = Eigen::VectorXd::Zero(m);
    int n_pos = 0, n_neg = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (y[i] > 0) {
            mu_pos += X.row(i).transpose();
            ++n_pos;
        } else {
            mu_neg += X.row(i).transpose();
            ++n_neg;
        }
    }
    if (n_pos == 0 || n_neg == 0) throw FitError("a group is empty");
    mu_pos /= n_pos;
    mu_neg /= n_neg;

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd& mu = y[i] > 0 ? mu_pos : mu_neg;
        Eigen::VectorXd d = X.row(i).transpose() - mu;
        scatter += d * d.transpose();
    }
    const double trace = scatter.trace();
    const double eps = trace > 0 ? 1e-6 * trace / static_cast<double>(m) : 1e-6;
    scatter += eps * Eigen::MatrixXd::Identity(m, m);

    Eigen::VectorXd w;
    try {
        w = solve_spd(scatter, mu_pos - mu_neg);
    } catch (const NumericError& e) {
        throw FitError(std::string("within-scatter solve failed: ") + e.what());
    }
    const double b = -w.dot(mu_pos + mu_neg) / 2.0;
    return make_plane(std::move(w), b);
}

Hyperplane fit_svm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                   int iterations) {
    require_both_signs(y);
    if (!X.allFinite()) throw FitError("non-finite input to fit_svm");
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();

    auto objective = [&](const Eigen::VectorXd& w, double b) {
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            hinge += std::max(0.0, 1.0 - y[i] * (X.row(i).dot(w) + b));
        }
        return 0.5 * w.squaredNorm() + C * hinge;
    };

    // Any minimizer lies in the ball f(w) <= f(0) = C n, so iterates are
    // projected back onto ||w|| <= sqrt(2 C n).
    const double radius = std::sqrt(2.0 * C * static_cast<double>(n));

    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    double b = 0.0;
    Eigen::VectorXd best_w = w;
    double best_b = b;
    double best_obj = objective(w, b);

    for (int t = 0; t < iterations; ++t) {
        Eigen::VectorXd grad_w = w;
        double grad_b = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (y[i] * (X.row(i).dot(w) + b) < 1.0) {
                grad_w -= C * y[i] * X.row(i).transpose();
                grad_b -= C * y[i];
            }
        }
        const double step = 1.0 / (1.0 + static_cast<double>(t));
        w -= step * grad_w;
        b -= step * grad_b;
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;

        const double obj = objective(w, b);
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
            best_b = b;
        }
    }
    return make_plane(std::move(best_w), best_b);
}

Hyperplane fit_lssvm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C) {
    require_both_signs(y);
    if (C <= 0) throw FitError("LSSVM penalty must be positive");
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    // Stationarity of 1/2||w||^2 + C/2 sum r_i^2 in (w, b).
    Eigen::MatrixXd M(m + 1, m + 1);
    M.topLeftCorner(m, m) =
        Eigen::MatrixXd::Identity(m, m) + C * (X.transpose() * X);
    Eigen::VectorXd col_sums = C * X.colwise().sum().transpose();
    M.topRightCorner(m, 1) = col_sums;
    M.bottomLeftCorner(1, m) = col_sums.transpose();
    M(m, m) = C * static_cast<double>(n);
    Eigen::VectorXd rhs(m + 1);
    rhs.head(m) = C * (X.transpose() * y);
    rhs[m] = C * y.sum();

    Eigen::VectorXd beta;
    try {
        beta = solve_spd(M, rhs);
    } catch (const NumericError& e) {
        throw FitError(std::string("singular LSSVM system: ") + e.what());
    }
    return make_plane(beta.head(m), beta[m]);
}

ProximalPair fit_mpsvm(const Eigen::MatrixXd& X_pos, const Eigen::MatrixXd& X_neg,
                       MpsvmMode mode, double delta) {
    if (X_pos.rows() == 0 || X_neg.rows() == 0) throw FitError("a group is empty");
    if (!X_pos.allFinite() || !X_neg.allFinite()) throw FitError("non-finite input to fit_mpsvm");
    if (X_pos.cols() != X_neg.cols()) throw FitError("group dimension mismatch");

    const Eigen::MatrixXd G = augmented_moment(X_pos);
    const Eigen::MatrixXd H = augmented_moment(X_neg);
    const double scale = std::max({G.cwiseAbs().maxCoeff(), H.cwiseAbs().maxCoeff(), 1.0});
    if ((G - H).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        throw FitError("groups are indistinguishable point sets");
    }

    const Eigen::Index m = X_pos.cols();
    auto to_plane = [m](const Eigen::VectorXd& z) {
        Eigen::VectorXd w = z.head(m);
        if (w.norm() <= kZeroDirectionTol) throw FitError("zero direction: invalid plane");
        Hyperplane plane;
        plane.w = std::move(w);
        plane.b = z[m];
        return plane;
    };

    ProximalPair pair;
    try {
        pair.plane_a = to_plane(proximal_direction(G, H, mode, delta));
        pair.plane_b = to_plane(proximal_direction(H, G, mode, delta));
    } catch (const NumericError& e) {
        throw FitError(std::string("proximal eigenproblem failed: ") + e.what());
    }
    return pair;
}

}  // namespace hetforest
