#pragma once

#include "awmvc/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace awmvc {

struct ProcrustesSolution {
    Matrix q;             ///< n_cols × n_rows, orthonormal rows
    double nuclear_norm;  ///< trace(q·A) at the optimum
    Index rank;           ///< numerical rank of A; < n_cols means the maximizer is not unique
};

/// Solves max trace(Q·A) over Q with orthonormal rows, for a tall A
/// (n_rows × n_cols, n_cols <= n_rows). With the thin SVD A = U Σ Vᵀ the
/// maximizer is Q = V Uᵀ and the optimum is the nuclear norm of A.
///
/// Rank-deficient A is accepted; the SVD-derived maximizer is returned.
inline ProcrustesSolution procrustes_solve(const Matrix& a)
{
    if (a.cols() > a.rows())
        throw ValidationError("procrustes: expected a tall matrix, got " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()));
    if (a.cols() == 0) throw ValidationError("procrustes: empty matrix");
    if (!all_finite(a)) throw NumericError("procrustes: non-finite input");

    // The column-pivoting QR preconditioner reduces the tall problem to a
    // square n_cols × n_cols SVD, so the cost stays O(n_rows · n_cols²).
    Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double tol = sigma.size() ? sigma(0) * 1e-12 * double(a.rows()) : 0.0;
    Index rank = 0;
    for (Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > tol) ++rank;
    return {svd.matrixV() * svd.matrixU().transpose(), sigma.sum(), rank};
}

inline Matrix procrustes_max_trace_rows(const Matrix& a) { return procrustes_solve(a).q; }

/// Orthonormal basis for the columns of a tall Gaussian draw (Householder QR).
inline Matrix orthonormal_columns(const Matrix& a)
{
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

} // namespace awmvc
