#include "hetforest/linalg.hpp"

#include <cmath>

namespace hetforest {

namespace {

void check_finite(const Eigen::MatrixXd& M, const char* what) {
    if (!M.allFinite()) throw NumericError(std::string("non-finite input to ") + what);
}

}  // namespace

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
    check_finite(A, "solve_spd");
    if (!rhs.allFinite()) throw NumericError("non-finite rhs in solve_spd");
    const Eigen::Index m = A.rows();
    if (A.cols() != m || rhs.size() != m) throw NumericError("solve_spd dimension mismatch");

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd x = llt.solve(rhs);
        if (x.allFinite()) return x;
    }
    const double jitter = 1e-10 * std::max(A.trace() / static_cast<double>(m), 1.0);
    Eigen::MatrixXd Aj = A + jitter * Eigen::MatrixXd::Identity(m, m);
    llt.compute(Aj);
    if (llt.info() != Eigen::Success) throw NumericError("solve_spd: matrix singular beyond jitter");
    Eigen::VectorXd x = llt.solve(rhs);
    if (!x.allFinite()) throw NumericError("solve_spd: matrix singular beyond jitter");
    return x;
}

void apply_sign_convention(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

EigPair generalized_eig_extreme(const Eigen::MatrixXd& G, const Eigen::MatrixXd& H,
                                EigWhich which) {
    check_finite(G, "generalized_eig_extreme");
    check_finite(H, "generalized_eig_extreme");
    const Eigen::Index m = G.rows();
    if (G.cols() != m || H.rows() != m || H.cols() != m) {
        throw NumericError("generalized_eig_extreme dimension mismatch");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
        throw NumericError("generalized_eig_extreme: H is singular");
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(G, H);
    if (solver.info() != Eigen::Success) {
        throw NumericError("generalized_eig_extreme: eigensolver did not converge");
    }

    EigPair out;
    const Eigen::Index pick = which == EigWhich::kMin ? 0 : m - 1;
    out.value = solver.eigenvalues()[pick];
    out.vector = solver.eigenvectors().col(pick);
    out.vector.normalize();
    apply_sign_convention(out.vector);
    if (!out.vector.allFinite() || !std::isfinite(out.value)) {
        throw NumericError("generalized_eig_extreme: non-finite eigenpair");
    }
    return out;
}

int symmetric_rank(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("symmetric_rank: eigensolver failed");
    const auto& vals = solver.eigenvalues();
    const double tol = 1e-10 * std::max(vals.cwiseAbs().maxCoeff(), 1.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals[i] > tol) ++rank;
    }
    return rank;
}

Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success) throw NumericError("nullspace_basis: eigensolver failed");
    const auto& vals = solver.eigenvalues();  // ascending
    const double tol = 1e-10 * std::max(vals.cwiseAbs().maxCoeff(), 1.0);
    Eigen::Index dim = 0;
    while (dim < vals.size() && vals[dim] <= tol) ++dim;
    return solver.eigenvectors().leftCols(dim);
}

}  // namespace hetforest
