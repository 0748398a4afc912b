#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace hetforest {

/// Raised when a split generator cannot produce a usable plane
/// (zero direction, degenerate groups). Split searches catch it and
/// skip or fall back.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the raw MPSVM mode when the denominator matrix is rank
/// deficient; callers treat it as the axis-parallel fallback signal.
class RankDeficiencyError : public FitError {
public:
    using FitError::FitError;
};

/// A trained linear decision boundary w . x + b over m features.
/// `feature_map` carries the global column indices the coefficients
/// refer to, so planes fitted in an mtry subspace apply directly to
/// full-width rows; an empty map means identity.
struct Hyperplane {
    Eigen::VectorXd w;
    double b = 0.0;
    std::vector<int> feature_map;

    /// w . x_sub + b for a full-width feature row.
    double decision(const Eigen::RowVectorXd& x) const;
    bool valid() const;
};

/// Mean / covariance / count triple summarizing a sample group.
struct GaussianSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    int count = 0;
};

/// One proximal plane per hyperclass, each normalized to ||(w, b)|| = 1.
struct ProximalPair {
    Hyperplane plane_a;
    Hyperplane plane_b;
};

enum class MpsvmMode { kTikhonov, kNullspace, kRaw };

/// Ridge regression with unpenalized offset on +-1 targets, via the
/// closed-form augmented normal equations.
Hyperplane fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

/// Ordinary least squares; identical to fit_ridge with a trace-scaled
/// jitter weight so rank-deficient designs stay solvable.
Hyperplane fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Fisher discriminant direction w = (S_w + eps I)^-1 (mu+ - mu-) with
/// the threshold at the midpoint of the group means.
Hyperplane fit_lda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Linear soft-margin SVM primal, minimized by a deterministic
/// full-batch subgradient scheme (fixed budget, step 1/(1+t), start at
/// zero, best iterate kept).
Hyperplane fit_svm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                   int iterations = 500);

/// Least-squares SVM, solved in closed form in the primal:
/// min 1/2 ||w||^2 + C/2 sum (y_i - w.x_i - b)^2.
Hyperplane fit_lssvm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C);

/// Multisurface proximal planes: for each group against the other, the
/// generalized eigenvector minimizing z'Gz / z'Hz over augmented
/// second-moment matrices G (own group) and H (other group).
/// kTikhonov adds delta * I to the denominator (and to the numerator if
/// the solve still fails); kNullspace searches null(H) for the direction
/// minimizing z'Gz when H is rank deficient; kRaw throws
/// RankDeficiencyError instead.
ProximalPair fit_mpsvm(const Eigen::MatrixXd& X_pos, const Eigen::MatrixXd& X_neg,
                       MpsvmMode mode, double delta = 0.01);

}  // namespace hetforest
