#pragma once

#include "awmvc/common.hpp"
#include "awmvc/dataset.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace awmvc {

inline constexpr const char* kNmiVariant = "sqrt";
inline constexpr const char* kFscoreVariant = "pairwise";

/// counts(i, j) = number of samples in predicted cluster i and true class j.
struct ContingencyTable {
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts;
    long long n = 0;

    Index clusters() const { return counts.rows(); }
    Index classes() const { return counts.cols(); }
};

inline ContingencyTable contingency(const Labels& pred, const Labels& truth)
{
    if (pred.size() != truth.size())
        throw ValidationError("label vectors differ in length: " + std::to_string(pred.size()) + " vs " +
                              std::to_string(truth.size()));
    if (pred.empty()) throw ValidationError("empty label vectors");
    const Labels p = remap_labels(pred);
    const Labels t = remap_labels(truth);
    const int kp = *std::max_element(p.begin(), p.end()) + 1;
    const int kt = *std::max_element(t.begin(), t.end()) + 1;
    ContingencyTable table;
    table.counts.setZero(kp, kt);
    for (std::size_t i = 0; i < p.size(); ++i) ++table.counts(p[i], t[i]);
    table.n = static_cast<long long>(p.size());
    return table;
}

/// Maximum-total-value one-to-one matching of min(a, b) row/column pairs
/// (Kuhn-Munkres with potentials on the padded square cost matrix).
inline std::vector<std::pair<int, int>> hungarian_max(const Matrix& value)
{
    if (!all_finite(value)) throw NumericError("hungarian: non-finite value matrix");
    const int rows = int(value.rows()), cols = int(value.cols());
    const int n = std::max(rows, cols);
    if (n == 0) return {};

    auto cost = [&](int i, int j) { return (i < rows && j < cols) ? -value(i, j) : 0.0; };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
    std::vector<int> match(std::size_t(n) + 1, 0), way(std::size_t(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(std::size_t(n) + 1, inf);
        std::vector<char> used(std::size_t(n) + 1, 0);
        do {
            used[std::size_t(j0)] = 1;
            const int i0 = match[std::size_t(j0)];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[std::size_t(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
                if (cur < minv[std::size_t(j)]) {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta) {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[std::size_t(j)]) {
                    u[std::size_t(match[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                } else {
                    minv[std::size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[std::size_t(j0)] != 0);
        do {
            const int j1 = way[std::size_t(j0)];
            match[std::size_t(j0)] = match[std::size_t(j1)];
            j0 = j1;
        } while (j0);
    }

    std::vector<std::pair<int, int>> pairs;
    for (int j = 1; j <= n; ++j) {
        const int i = match[std::size_t(j)] - 1;
        if (i < rows && j - 1 < cols) pairs.emplace_back(i, j - 1);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

/// Fraction of samples labeled correctly under the best cluster→class matching.
inline double acc(const Labels& pred, const Labels& truth)
{
    const auto table = contingency(pred, truth);
    const Matrix value = table.counts.cast<double>();
    double hits = 0.0;
    for (const auto& [i, j] : hungarian_max(value)) hits += value(i, j);
    return hits / double(table.n);
}

/// I(pred; truth) / sqrt(H(pred) H(truth)), natural log. Both partitions
/// constant gives 1, exactly one constant gives 0.
inline double nmi(const Labels& pred, const Labels& truth)
{
    const auto table = contingency(pred, truth);
    const double n = double(table.n);
    const Eigen::VectorXd row = table.counts.cast<double>().rowwise().sum();
    const Eigen::VectorXd col = table.counts.cast<double>().colwise().sum().transpose();
    auto entropy = [n](const Eigen::VectorXd& c) {
        double h = 0.0;
        for (Index i = 0; i < c.size(); ++i)
            if (c(i) > 0) h -= (c(i) / n) * std::log(c(i) / n);
        return h;
    };
    const double hp = entropy(row), ht = entropy(col);
    const bool pconst = table.clusters() == 1, tconst = table.classes() == 1;
    if (pconst && tconst) return 1.0;
    if (pconst || tconst) return 0.0;

    double mi = 0.0;
    for (Index i = 0; i < table.clusters(); ++i)
        for (Index j = 0; j < table.classes(); ++j) {
            const double c = double(table.counts(i, j));
            if (c > 0) mi += (c / n) * std::log(c * n / (row(i) * col(j)));
        }
    return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

/// (1/n) Σ_clusters max_class overlap.
inline double purity(const Labels& pred, const Labels& truth)
{
    const auto table = contingency(pred, truth);
    long long hits = 0;
    for (Index i = 0; i < table.clusters(); ++i) hits += table.counts.row(i).maxCoeff();
    return double(hits) / double(table.n);
}

/// Pairwise F-measure over all n(n−1)/2 sample pairs, computed from the
/// contingency table. Zero when no pair is co-clustered and co-classed.
inline double fscore(const Labels& pred, const Labels& truth)
{
    const auto table = contingency(pred, truth);
    auto pairs = [](long long c) { return double(c) * double(c - 1) / 2.0; };
    double tp = 0.0, same_cluster = 0.0, same_class = 0.0;
    for (Index i = 0; i < table.clusters(); ++i)
        for (Index j = 0; j < table.classes(); ++j) tp += pairs(table.counts(i, j));
    for (Index i = 0; i < table.clusters(); ++i) same_cluster += pairs(table.counts.row(i).sum());
    for (Index j = 0; j < table.classes(); ++j) same_class += pairs(table.counts.col(j).sum());
    if (tp == 0.0) return 0.0;
    const double precision = tp / same_cluster;
    const double recall = tp / same_class;
    return 2.0 * precision * recall / (precision + recall);
}

struct MetricSet {
    double acc = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
    double fscore = 0.0;
};

inline MetricSet evaluate(const Labels& pred, const Labels& truth)
{
    return {awmvc::acc(pred, truth), awmvc::nmi(pred, truth), awmvc::purity(pred, truth),
            awmvc::fscore(pred, truth)};
}

} // namespace awmvc
