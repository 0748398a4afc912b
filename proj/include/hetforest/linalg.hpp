#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace hetforest {

/// Raised when a numerical kernel cannot produce a result (singular
/// system beyond jitter, non-convergence, non-finite input).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solves A x = rhs for symmetric positive-definite A via Cholesky.
/// A single trace-scaled ridge jitter is attempted when the plain
/// factorization fails; a system that is singular beyond that throws.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs);

enum class EigWhich { kMin, kMax };

struct EigPair {
    double value = 0.0;
    Eigen::VectorXd vector;
};

/// Extreme eigenpair of the symmetric pencil G z = lambda H z with H
/// positive definite. The eigenvector is unit length with the sign
/// convention that its first nonzero component is positive.
EigPair generalized_eig_extreme(const Eigen::MatrixXd& G, const Eigen::MatrixXd& H,
                                EigWhich which);

/// Flips v so its first component larger than 1e-12 in magnitude is
/// positive; zero vectors are returned unchanged.
void apply_sign_convention(Eigen::VectorXd& v);

/// Rank of a symmetric PSD matrix: eigenvalues above
/// 1e-10 * max(|lambda|_max, 1) count.
int symmetric_rank(const Eigen::MatrixXd& M);

/// Orthonormal basis of the (near-)null space of a symmetric PSD matrix,
/// one column per eigenvalue at or below the rank tolerance. May have
/// zero columns when M is full rank.
Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& M);

}  // namespace hetforest
