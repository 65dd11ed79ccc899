#pragma once

#include "awmvc/common.hpp"

#include <limits>
#include <random>
#include <vector>

namespace awmvc {

struct KMeansConfig {
    int k = 2;
    int restarts = 50;
    int max_lloyd_iters = 100;
    std::uint64_t seed = 0;
};

struct Assignment {
    Labels labels;
    Matrix centroids;  ///< dim × k
    double sse = 0.0;
    int restarts_run = 0;
    int best_restart = 0;
    std::vector<double> restart_sse;
};

struct LloydResult {
    Labels labels;
    Matrix centroids;
    double sse = 0.0;
    std::vector<double> sse_trace;  ///< SSE after each centroid update
    int iterations = 0;
};

/// Within-cluster sum of squared distances to the cluster means.
inline double cluster_sse(const Matrix& points, const Labels& labels, int k)
{
    Matrix sums = Matrix::Zero(points.rows(), k);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < points.cols(); ++i) {
        sums.col(labels[std::size_t(i)]) += points.col(i);
        ++counts[std::size_t(labels[std::size_t(i)])];
    }
    double sse = 0.0;
    for (Index i = 0; i < points.cols(); ++i) {
        const int c = labels[std::size_t(i)];
        sse += (points.col(i) - sums.col(c) / double(counts[std::size_t(c)])).squaredNorm();
    }
    return sse;
}

namespace detail {

// Nearest centroid, ties to the lowest index.
inline int nearest(const Matrix& points, Index i, const Matrix& centroids, double* dist = nullptr)
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.cols(); ++c) {
        const double d = (points.col(i) - centroids.col(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = int(c);
        }
    }
    if (dist) *dist = best_d;
    return best;
}

inline Labels assign_all(const Matrix& points, const Matrix& centroids)
{
    Labels labels(static_cast<std::size_t>(points.cols()));
    for (Index i = 0; i < points.cols(); ++i) labels[std::size_t(i)] = nearest(points, i, centroids);
    return labels;
}

// Moves the point farthest from its own centroid into each empty cluster.
inline void repair_empty(const Matrix& points, Labels& labels, Matrix& centroids)
{
    const int k = int(centroids.cols());
    std::vector<Index> sizes(std::size_t(k), 0);
    for (int l : labels) ++sizes[std::size_t(l)];
    for (int j = 0; j < k; ++j) {
        if (sizes[std::size_t(j)] > 0) continue;
        Index far = -1;
        double far_d = -1.0;
        for (Index i = 0; i < points.cols(); ++i) {
            const int c = labels[std::size_t(i)];
            if (sizes[std::size_t(c)] < 2) continue;
            const double d = (points.col(i) - centroids.col(c)).squaredNorm();
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) return;  // fewer points than clusters
        --sizes[std::size_t(labels[std::size_t(far)])];
        labels[std::size_t(far)] = j;
        sizes[std::size_t(j)] = 1;
        centroids.col(j) = points.col(far);
    }
}

inline void recompute_means(const Matrix& points, const Labels& labels, Matrix& centroids)
{
    Matrix sums = Matrix::Zero(centroids.rows(), centroids.cols());
    std::vector<Index> counts(std::size_t(centroids.cols()), 0);
    for (Index i = 0; i < points.cols(); ++i) {
        sums.col(labels[std::size_t(i)]) += points.col(i);
        ++counts[std::size_t(labels[std::size_t(i)])];
    }
    for (Index c = 0; c < centroids.cols(); ++c)
        if (counts[std::size_t(c)] > 0) centroids.col(c) = sums.col(c) / double(counts[std::size_t(c)]);
}

inline double sse_against(const Matrix& points, const Labels& labels, const Matrix& centroids)
{
    double sse = 0.0;
    for (Index i = 0; i < points.cols(); ++i)
        sse += (points.col(i) - centroids.col(labels[std::size_t(i)])).squaredNorm();
    return sse;
}

inline void check_points(const Matrix& points, int k)
{
    if (k < 1) throw ValidationError("k-means: k must be positive");
    if (points.cols() < k)
        throw ValidationError("k-means: " + std::to_string(points.cols()) + " points for k = " + std::to_string(k));
    if (!all_finite(points)) throw NumericError("k-means: non-finite input");
}

} // namespace detail

/// k-means++ seeding: first center uniform, then D²-weighted draws.
inline Matrix kmeanspp_seed(const Matrix& points, int k, std::mt19937_64& rng)
{
    detail::check_points(points, k);
    const Index n = points.cols();
    Matrix centroids(points.rows(), k);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centroids.col(0) = points.col(pick(rng));

    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) d2[std::size_t(i)] = (points.col(i) - centroids.col(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : d2) total += d;
        Index chosen = 0;
        if (total > 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            chosen = n - 1;
            for (Index i = 0; i < n; ++i) {
                acc += d2[std::size_t(i)];
                if (u < acc && d2[std::size_t(i)] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.col(c) = points.col(chosen);
        for (Index i = 0; i < n; ++i)
            d2[std::size_t(i)] = std::min(d2[std::size_t(i)], (points.col(i) - centroids.col(c)).squaredNorm());
    }
    return centroids;
}

/// Lloyd iterations from explicit initial centroids. Stops when the
/// assignment no longer changes or after max_iters centroid updates.
inline LloydResult lloyd(const Matrix& points, Matrix centroids, int max_iters)
{
    detail::check_points(points, int(centroids.cols()));
    if (centroids.rows() != points.rows()) throw ValidationError("k-means: centroid dimension mismatch");

    LloydResult res;
    Labels labels = detail::assign_all(points, centroids);
    for (int it = 1; it <= max_iters; ++it) {
        detail::repair_empty(points, labels, centroids);
        detail::recompute_means(points, labels, centroids);
        res.sse_trace.push_back(detail::sse_against(points, labels, centroids));
        res.iterations = it;
        Labels next = detail::assign_all(points, centroids);
        if (next == labels) break;
        labels = std::move(next);
        if (it == max_iters) {
            detail::repair_empty(points, labels, centroids);
            detail::recompute_means(points, labels, centroids);
            res.sse_trace.push_back(detail::sse_against(points, labels, centroids));
        }
    }
    res.sse = res.sse_trace.back();
    res.labels = std::move(labels);
    res.centroids = std::move(centroids);
    return res;
}

/// Best-SSE assignment over cfg.restarts k-means++-seeded Lloyd runs.
/// Restart r draws from its own sub-seed, so the winner does not depend on
/// how restarts are scheduled across threads.
inline Assignment kmeans(const Matrix& points, const KMeansConfig& cfg)
{
    detail::check_points(points, cfg.k);
    if (cfg.restarts < 1 || cfg.max_lloyd_iters < 1)
        throw ValidationError("k-means: restarts and max_lloyd_iters must be positive");

    std::vector<LloydResult> runs(std::size_t(cfg.restarts));
    parallel_for(runs.size(), [&](std::size_t r) {
        std::mt19937_64 rng(mix_seed(cfg.seed, r));
        runs[r] = lloyd(points, kmeanspp_seed(points, cfg.k, rng), cfg.max_lloyd_iters);
    });

    Assignment best;
    best.restarts_run = cfg.restarts;
    std::size_t winner = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        best.restart_sse.push_back(runs[r].sse);
        if (runs[r].sse < runs[winner].sse) winner = r;
    }
    best.best_restart = int(winner);
    best.sse = runs[winner].sse;
    best.labels = std::move(runs[winner].labels);
    best.centroids = std::move(runs[winner].centroids);
    return best;
}

} // namespace awmvc
