#include <gtest/gtest.h>

#include "lmmc/evaluation.hpp"
#include "oracles.hpp"

using namespace lmmc;

namespace {

LabeledPartition random_partition(std::mt19937_64& rng, std::size_t n, std::size_t k, int classes) {
    LabeledPartition p;
    for (std::size_t i = 0; i < n; ++i) {
        p.predicted.push_back(rng() % k);
        p.truth.push_back(int(rng() % std::uint64_t(classes)));
    }
    return p;
}

}  // namespace

TEST(Purity, IdentityIsOne) {
    EXPECT_EQ(purity({{0, 0, 1, 2}, {5, 5, 3, 1}}), 1.0);
}

TEST(Purity, HandCount) {
    // {A, A, B} and {B, B}
    EXPECT_DOUBLE_EQ(purity({{0, 0, 0, 1, 1}, {0, 0, 1, 1, 1}}), 0.8);
}

TEST(Purity, SingleClusterIsModalFrequency) {
    EXPECT_DOUBLE_EQ(purity({{0, 0, 0, 0, 0}, {2, 1, 2, 2, 1}}), 0.6);
}

TEST(Purity, EmptyOrMismatchedThrows) {
    EXPECT_THROW(purity({{}, {}}), error);
    EXPECT_THROW(purity({{0, 1}, {0}}), dimension_error);
}

TEST(Metrics, IdenticalPartitions) {
    const LabeledPartition p{{0, 0, 1, 1, 2}, {4, 4, 7, 7, 1}};
    EXPECT_DOUBLE_EQ(nmi(p), 1.0);
    EXPECT_DOUBLE_EQ(rand_index(p), 1.0);
}

TEST(Metrics, MatchBruteForceDefinitions) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        const LabeledPartition p = random_partition(rng, n, 1 + rng() % 6, 1 + int(rng() % 6));
        EXPECT_EQ(purity(p), oracle::purity(p.predicted, p.truth));
        EXPECT_EQ(rand_index(p), oracle::rand_index(p.predicted, p.truth));
        EXPECT_NEAR(nmi(p), oracle::nmi(p.predicted, p.truth), 1e-9);
    }
}

TEST(Metrics, RelabelingInvariance) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const LabeledPartition p = random_partition(rng, 30, 4, 3);
        std::vector<std::size_t> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        LabeledPartition q = p;
        for (auto& c : q.predicted) c = perm[c] + 10;
        for (auto& t : q.truth) t = 7 - t;
        EXPECT_EQ(purity(q), purity(p));
        EXPECT_EQ(rand_index(q), rand_index(p));
        EXPECT_NEAR(nmi(q), nmi(p), 1e-12);
    }
}

TEST(Metrics, RefinementNeverLowersPurity) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const LabeledPartition p = random_partition(rng, 30, 3, 4);
        LabeledPartition finer = p;
        for (auto& c : finer.predicted) c = c * 2 + rng() % 2;
        EXPECT_GE(purity(finer), purity(p));
    }
}

TEST(Metrics, RandNearAnalyticExpectation) {
    std::mt19937_64 rng(8);
    const std::size_t n = 1000;
    const LabeledPartition p = random_partition(rng, n, 4, 5);
    auto same_pair_rate = [n](const auto& labels) {
        std::map<long long, double> counts;
        for (auto x : labels) counts[static_cast<long long>(x)] += 1.0;
        double s = 0.0;
        for (const auto& [key, c] : counts) s += c * (c - 1.0);
        return s / (double(n) * double(n - 1));
    };
    const double a = same_pair_rate(p.predicted), b = same_pair_rate(p.truth);
    EXPECT_NEAR(rand_index(p), a * b + (1.0 - a) * (1.0 - b), 0.05);
}

TEST(KMeans, SeparatedBlobs) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 0.4);
    std::vector<Vector> pts;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const double c = i % 2 ? 6.0 : 0.0;
        pts.push_back({c + g(rng), c + g(rng)});
        labels.push_back(i % 2);
    }
    const KMeansResult r = kmeans(std::span<const Vector>(pts), 2, 3);
    EXPECT_EQ(purity({r.cluster, labels}), 1.0);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] + 1e-9);
}

TEST(KMeans, SingleCluster) {
    const std::vector<Vector> pts{{1.0}, {2.0}, {5.0}};
    const KMeansResult r = kmeans(std::span<const Vector>(pts), 1, 0);
    EXPECT_EQ(r.cluster, (std::vector<std::size_t>{0, 0, 0}));
    EXPECT_NEAR(r.centers[0][0], 8.0 / 3.0, 1e-12);
}

TEST(KMeans, UsesDesignatedVariant) {
    std::vector<Sample> s(4);
    for (int i = 0; i < 4; ++i) {
        s[i].id = i;
        s[i].variants.push_back({{0.0}, ""});
        s[i].variants.push_back({{i < 2 ? 0.0 : 10.0}, ""});
    }
    const KMeansResult r = kmeans(std::span<const Sample>(s), 2, 0, 5, 1);
    EXPECT_EQ(r.cluster[0], r.cluster[1]);
    EXPECT_EQ(r.cluster[2], r.cluster[3]);
    EXPECT_NE(r.cluster[0], r.cluster[2]);
}

TEST(KMeans, RejectsBadK) {
    const std::vector<Vector> pts{{1.0}, {2.0}};
    EXPECT_THROW(kmeans(std::span<const Vector>(pts), 0, 0), config_error);
    EXPECT_THROW(kmeans(std::span<const Vector>(pts), 3, 0), config_error);
}
