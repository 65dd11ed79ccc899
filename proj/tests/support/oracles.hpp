#pragma once

// Test-only reference implementations. None of these share code paths with
// the library routines they check.

#include "awmvc/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace awmvc::oracle {

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
    return m;
}

/// Modified Gram-Schmidt on the rows of a Gaussian draw: a random
/// rows × cols matrix with orthonormal rows (rows <= cols).
inline Matrix random_row_orthonormal(Index rows, Index cols, std::mt19937_64& rng)
{
    Matrix q = gaussian(rows, cols, rng);
    for (Index i = 0; i < rows; ++i) {
        for (int pass = 0; pass < 2; ++pass)
            for (Index j = 0; j < i; ++j) q.row(i) -= q.row(i).dot(q.row(j)) * q.row(j);
        q.row(i) /= q.row(i).norm();
    }
    return q;
}

inline double trace_product(const Matrix& q, const Matrix& a) { return (q * a).trace(); }

/// Polar factor route for argmax trace(Q A): Q = (AᵀA)^{-1/2} Aᵀ, computed in
/// long double through a symmetric eigen-decomposition. Requires full column rank.
inline Matrix polar_max_trace_rows(const Matrix& a)
{
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LMatrix al = a.cast<long double>();
    const LMatrix gram = al.transpose() * al;
    Eigen::SelfAdjointEigenSolver<LMatrix> eig(gram);
    const auto& vals = eig.eigenvalues();
    LMatrix inv_sqrt = LMatrix::Zero(gram.rows(), gram.cols());
    for (Index i = 0; i < vals.size(); ++i) inv_sqrt(i, i) = 1.0L / std::sqrt(vals(i));
    const LMatrix root = eig.eigenvectors() * inv_sqrt * eig.eigenvectors().transpose();
    return (root * al.transpose()).cast<double>();
}

/// Sum of singular values via eigenvalues of AᵀA.
inline double nuclear_norm(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
    double s = 0.0;
    for (Index i = 0; i < eig.eigenvalues().size(); ++i) s += std::sqrt(std::max(0.0, eig.eigenvalues()(i)));
    return s;
}

/// Nuclear norm of B·C for a known inner dimension r: with B = Q_B R_B and
/// Cᵀ = Q_C R_C, the product shares its singular values with the r × r core
/// R_B R_Cᵀ, so zero singular values never pass through a square root.
inline double nuclear_norm_factored(const Matrix& b, const Matrix& c)
{
    const Matrix rb = Eigen::HouseholderQR<Matrix>(b).matrixQR().topRows(b.cols()).triangularView<Eigen::Upper>();
    const Matrix ct = c.transpose();
    const Matrix rc = Eigen::HouseholderQR<Matrix>(ct).matrixQR().topRows(ct.cols()).triangularView<Eigen::Upper>();
    return nuclear_norm(rb * rc.transpose());
}

/// Central finite-difference gradient of f at x, relative step h·max(1, |x_ij|).
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, Matrix x, double h = 1e-6)
{
    Matrix g(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j) {
            const double orig = x(i, j);
            const double step = h * std::max(1.0, std::abs(orig));
            x(i, j) = orig + step;
            const double up = f(x);
            x(i, j) = orig - step;
            const double down = f(x);
            x(i, j) = orig;
            g(i, j) = (up - down) / (2.0 * step);
        }
    return g;
}

/// Best number of hits over every injective map from the smaller label set
/// into the larger, by exhaustive permutation.
inline double brute_force_acc(const Labels& pred, const Labels& truth)
{
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    std::vector<std::vector<int>> counts(std::size_t(kp), std::vector<int>(std::size_t(kt), 0));
    for (std::size_t i = 0; i < pred.size(); ++i) ++counts[std::size_t(pred[i])][std::size_t(truth[i])];
    const int big = std::max(kp, kt);
    std::vector<int> perm(static_cast<std::size_t>(big));
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
        int hits = 0;
        // cluster i ↦ class perm[i] when kp <= kt, else class j ↦ cluster perm[j]
        if (kp <= kt) {
            for (int i = 0; i < kp; ++i) hits += counts[std::size_t(i)][std::size_t(perm[std::size_t(i)])];
        } else {
            for (int j = 0; j < kt; ++j) hits += counts[std::size_t(perm[std::size_t(j)])][std::size_t(j)];
        }
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return double(best) / double(pred.size());
}

/// Literal O(n²) pair enumeration for the pairwise F-measure.
inline double pairwise_fscore(const Labels& pred, const Labels& truth)
{
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            const bool sc = pred[i] == pred[j], sk = truth[i] == truth[j];
            if (sc && sk) ++tp;
            else if (sc) ++fp;
            else if (sk) ++fn;
        }
    if (tp == 0) return 0.0;
    const double p = double(tp) / double(tp + fp), r = double(tp) / double(tp + fn);
    return 2 * p * r / (p + r);
}

/// Minimum SSE over every assignment of n points to k non-empty clusters.
inline double exhaustive_kmeans_sse(const Matrix& points, int k)
{
    const Index n = points.cols();
    std::vector<int> assign(std::size_t(n), 0);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(Index, int)> rec = [&](Index i, int used) {
        if (i == n) {
            if (used != k) return;
            double sse = 0.0;
            for (int c = 0; c < k; ++c) {
                Vector mean = Vector::Zero(points.rows());
                int cnt = 0;
                for (Index j = 0; j < n; ++j)
                    if (assign[std::size_t(j)] == c) {
                        mean += points.col(j);
                        ++cnt;
                    }
                mean /= cnt;
                for (Index j = 0; j < n; ++j)
                    if (assign[std::size_t(j)] == c) sse += (points.col(j) - mean).squaredNorm();
            }
            best = std::min(best, sse);
            return;
        }
        // restricted-growth strings enumerate each set partition once
        for (int c = 0; c <= std::min(used, k - 1); ++c) {
            assign[std::size_t(i)] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return best;
}

} // namespace awmvc::oracle
