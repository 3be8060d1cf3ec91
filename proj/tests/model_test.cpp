#include <gtest/gtest.h>

#include "lmmc/training.hpp"

using namespace lmmc;

namespace {

Sample make_sample(int id, std::vector<Vector> variants) {
    Sample s;
    s.id = id;
    for (auto& v : variants) s.variants.push_back({std::move(v), ""});
    return s;
}

}  // namespace

TEST(Score, ZeroVariantScoresZero) {
    const Score s = score(make_sample(0, {{0.0, 0.0}}), {3.0, -2.0});
    EXPECT_EQ(s.value, 0.0);
    EXPECT_EQ(s.best_variant, 0u);
}

TEST(Score, PicksBestVariant) {
    const Score s = score(make_sample(0, {{1.0, 0.0}, {0.0, 2.0}}), {1.0, 1.0});
    EXPECT_EQ(s.value, 2.0);
    EXPECT_EQ(s.best_variant, 1u);
}

TEST(Score, TiesGoToLowestVariant) {
    const Score s = score(make_sample(0, {{1.0, 0.0}, {0.0, 1.0}}), {1.0, 1.0});
    EXPECT_EQ(s.best_variant, 0u);
}

TEST(Score, DimensionMismatchNamesBothSizes) {
    try {
        score(make_sample(0, {{1.0, 2.0}}), {1.0, 2.0, 3.0});
        FAIL() << "expected dimension_error";
    } catch (const dimension_error& e) {
        EXPECT_EQ(e.expected(), 2u);
        EXPECT_EQ(e.actual(), 3u);
    }
}

TEST(ScoreMatrix, SingleZeroSample) {
    const std::vector<Sample> s{make_sample(0, {{0.0}})};
    const ScoreMatrix m = score_matrix(s, {{{5.0}}, 1.0});
    ASSERT_EQ(m.scores.rows(), 1u);
    ASSERT_EQ(m.scores.cols(), 1u);
    EXPECT_EQ(m.scores(0, 0), 0.0);
}

TEST(ScoreMatrix, HandCheckedTwoByTwo) {
    const std::vector<Sample> s{make_sample(0, {{1, 2}, {3, 0}}), make_sample(1, {{0, 1}})};
    const ModelParams p{{{1, 1}, {2, -1}}, 1.0};
    const ScoreMatrix m = score_matrix(s, p);
    EXPECT_EQ(m.scores(0, 0), 3.0);  // max(1+2, 3+0), tie to variant 0
    EXPECT_EQ(m.variant(0, 0), 0u);
    EXPECT_EQ(m.scores(0, 1), 6.0);  // max(2-2, 6-0)
    EXPECT_EQ(m.variant(0, 1), 1u);
    EXPECT_EQ(m.scores(1, 0), 1.0);
    EXPECT_EQ(m.scores(1, 1), -1.0);
}

TEST(Objective, ZeroWeightsGiveUnitHinges) {
    const std::size_t n = 5, k = 3;
    std::vector<Sample> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(make_sample(int(i), {{double(i), 1.0}}));
    const ModelParams p{std::vector<Vector>(k, Vector(2, 0.0)), 0.7};
    Assignment a;
    a.sample_cluster = {0, 1, 2, 0, 1};
    EXPECT_DOUBLE_EQ(objective(s, p, a), double(n * (k - 1)) / double(k));
}

TEST(Objective, MarginAboveOneCostsNothing) {
    // S row (3, 1); hinge part only, since nonzero scores need nonzero weights
    const std::vector<Sample> s{make_sample(0, {{1.0}})};
    const ScoreMatrix sm = score_matrix(s, {{{3.0}, {1.0}}, 1.0});
    EXPECT_EQ(slack_total(sm.scores, std::vector<std::size_t>{0}), 0.0);
}

TEST(Objective, RegularizerIsHalfLambdaSquaredNorm) {
    const ModelParams p{{{1.0, 2.0}, {0.0, 3.0}}, 0.5};
    EXPECT_DOUBLE_EQ(regularizer(p), 0.25 * 14.0);
}

TEST(Objective, UnassignedSamplesAreListed) {
    const std::vector<Sample> s{make_sample(0, {{1.0}}), make_sample(1, {{1.0}}), make_sample(2, {{1.0}})};
    Assignment a;
    a.sample_cluster = {0, unassigned, 5};
    try {
        objective(s, {{{1.0}, {1.0}}, 1.0}, a);
        FAIL() << "expected unassigned_error";
    } catch (const unassigned_error& e) {
        EXPECT_EQ(e.ids(), (std::vector<int>{1, 2}));
    }
}

TEST(InitParams, AllOnes) {
    const ModelParams p = init_params(3, 2);
    ASSERT_EQ(p.clusters(), 2u);
    for (const auto& w : p.weights) EXPECT_EQ(w, (Vector{1.0, 1.0, 1.0}));
}

TEST(InitParams, RanksVariantsByComponentSum) {
    const Sample s = make_sample(0, {{1.0, 1.0}, {0.5, 2.0}, {3.0, -2.0}});
    EXPECT_EQ(score(s, init_params(2, 1).weights[0]).best_variant, 1u);
}

TEST(InitParams, EveryClusterScoresAlike) {
    const std::vector<Sample> s{make_sample(0, {{1, 2, 3}}), make_sample(1, {{-1, 0, 4}})};
    const ScoreMatrix m = score_matrix(s, init_params(3, 4));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t t = 1; t < 4; ++t) EXPECT_EQ(m.scores(i, t), m.scores(i, 0));
}

TEST(InitParams, RejectsZeroSizes) {
    EXPECT_THROW(init_params(0, 2), config_error);
    EXPECT_THROW(init_params(2, 0), config_error);
}
