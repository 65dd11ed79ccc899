#include "awmvc/metrics.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace awmvc;

namespace {

Labels random_labels(std::size_t n, int k, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> u(0, k - 1);
    Labels l(n);
    for (auto& x : l) x = u(rng);
    // make all k present so the alphabet size is exactly k
    for (int c = 0; c < k && std::size_t(c) < n; ++c) l[std::size_t(c)] = c;
    return l;
}

double total(const Matrix& v, const std::vector<std::pair<int, int>>& pairs)
{
    double s = 0.0;
    for (auto [i, j] : pairs) s += v(i, j);
    return s;
}

} // namespace

TEST(Hungarian, Identity)
{
    const auto pairs = hungarian_max(Matrix::Identity(3, 3));
    EXPECT_EQ(pairs, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}}));
}

TEST(Hungarian, TwoByTwo)
{
    Matrix v(2, 2);
    v << 1, 2, 3, 4;
    // both permutations total 5; any optimal matching is acceptable
    EXPECT_DOUBLE_EQ(total(v, hungarian_max(v)), 5.0);
    EXPECT_EQ(hungarian_max(v).size(), 2u);
}

TEST(Hungarian, MatchesPermutationBruteForce)
{
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> u(-20, 20);
    for (int t = 0; t < 200; ++t) {
        Matrix v(5, 5);
        for (Index i = 0; i < 25; ++i) v(i) = u(rng);
        std::vector<int> perm{0, 1, 2, 3, 4};
        double best = -1e300;
        do {
            double s = 0;
            for (int i = 0; i < 5; ++i) s += v(i, perm[std::size_t(i)]);
            best = std::max(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        const auto pairs = hungarian_max(v);
        EXPECT_EQ(pairs.size(), 5u);
        EXPECT_DOUBLE_EQ(total(v, pairs), best);
    }
}

TEST(Hungarian, Rectangular)
{
    Matrix v(2, 4);
    v << 1, 9, 2, 0, 8, 7, 0, 1;
    const auto pairs = hungarian_max(v);
    EXPECT_EQ(pairs.size(), 2u);
    EXPECT_DOUBLE_EQ(total(v, pairs), 17.0);
    EXPECT_DOUBLE_EQ(total(v.transpose(), hungarian_max(v.transpose())), 17.0);
}

TEST(Acc, Basics)
{
    const Labels truth{0, 0, 1, 1, 2, 2, 2};
    EXPECT_DOUBLE_EQ(acc(truth, truth), 1.0);
    EXPECT_DOUBLE_EQ(acc(Labels{2, 2, 0, 0, 1, 1, 1}, truth), 1.0);
    EXPECT_DOUBLE_EQ(acc(Labels{0, 0, 1, 1, 2, 2}, Labels{0, 0, 0, 1, 1, 1}), 4.0 / 6.0);
    EXPECT_THROW(acc(Labels{0}, Labels{0, 1}), ValidationError);
    EXPECT_THROW(acc(Labels{}, Labels{}), ValidationError);
}

TEST(Acc, MatchesExhaustiveOracle)
{
    std::mt19937_64 rng(2);
    for (int t = 0; t < 200; ++t) {
        const int kp = 1 + t % 6, kt = 1 + (t / 6) % 6;
        const auto pred = random_labels(40, kp, rng);
        const auto truth = random_labels(40, kt, rng);
        EXPECT_NEAR(acc(pred, truth), oracle::brute_force_acc(pred, truth), 1e-15);
    }
}

TEST(Nmi, AnalyticCases)
{
    const Labels truth{0, 0, 1, 1, 2, 2};
    EXPECT_NEAR(nmi(truth, truth), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(nmi(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}), 0.0);
    EXPECT_DOUBLE_EQ(nmi(Labels{0, 0, 0}, Labels{1, 1, 1}), 1.0);
    EXPECT_DOUBLE_EQ(nmi(Labels{0, 0, 0}, Labels{0, 1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(nmi(Labels{0, 1, 1}, Labels{0, 0, 0}), 0.0);
}

TEST(Nmi, IndependentSplitsApproachZero)
{
    std::mt19937_64 rng(3);
    const auto a = random_labels(10000, 2, rng);
    const auto b = random_labels(10000, 2, rng);
    EXPECT_LE(nmi(a, b), 0.05);
}

TEST(Nmi, Symmetric)
{
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const auto a = random_labels(50, 2 + t % 5, rng);
        const auto b = random_labels(50, 2 + t % 3, rng);
        EXPECT_NEAR(nmi(a, b), nmi(b, a), 1e-12);
    }
}

TEST(Purity, Cases)
{
    const Labels truth{0, 1, 2, 0, 1, 2};
    EXPECT_DOUBLE_EQ(purity(truth, truth), 1.0);
    EXPECT_DOUBLE_EQ(purity(Labels(6, 0), truth), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(purity(Labels{0, 0, 1, 1, 2, 2}, Labels{0, 0, 0, 1, 1, 1}), 5.0 / 6.0);
}

TEST(Fscore, Cases)
{
    const Labels truth{0, 0, 1, 1, 1};
    EXPECT_DOUBLE_EQ(fscore(truth, truth), 1.0);
    EXPECT_DOUBLE_EQ(fscore(Labels{0, 1, 2, 3, 4}, truth), 0.0);
    EXPECT_NEAR(fscore(Labels{0, 0, 1, 1}, Labels{0, 0, 0, 1}), 0.4, 1e-15);
}

TEST(Fscore, MatchesPairEnumeration)
{
    std::mt19937_64 rng(5);
    for (std::size_t n : {2u, 10u, 57u, 200u, 500u}) {
        for (int t = 0; t < 5; ++t) {
            const auto a = random_labels(n, 1 + t, rng);
            const auto b = random_labels(n, 2 + t % 3, rng);
            EXPECT_NEAR(fscore(a, b), oracle::pairwise_fscore(a, b), 1e-12);
        }
    }
}

TEST(Metrics, RelabelInvariance)
{
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        const auto pred = random_labels(60, 4, rng);
        const auto truth = random_labels(60, 3, rng);
        std::vector<int> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        Labels relabeled = pred;
        for (auto& l : relabeled) l = perm[std::size_t(l)] + 10;  // arbitrary alphabet
        const auto base = evaluate(pred, truth);
        const auto moved = evaluate(relabeled, truth);
        EXPECT_NEAR(base.acc, moved.acc, 1e-15);
        EXPECT_NEAR(base.nmi, moved.nmi, 1e-12);
        EXPECT_NEAR(base.purity, moved.purity, 1e-15);
        EXPECT_NEAR(base.fscore, moved.fscore, 1e-15);
    }
}

TEST(Contingency, SumsToN)
{
    const auto t = contingency(Labels{0, 1, 1, 2}, Labels{5, 5, 6, 6});
    EXPECT_EQ(t.counts.sum(), 4);
    EXPECT_EQ(t.clusters(), 3);
    EXPECT_EQ(t.classes(), 2);
}
