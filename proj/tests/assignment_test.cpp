#include <gtest/gtest.h>

#include "lmmc/assignment.hpp"
#include "oracles.hpp"

using namespace lmmc;

namespace {

Matrix<double> matrix(std::vector<std::vector<double>> rows) {
    Matrix<double> m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::vector<std::size_t> row_argmin(const Matrix<double>& c) {
    std::vector<std::size_t> out(c.rows(), 0);
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t t = 1; t < c.cols(); ++t)
            if (c(i, t) < c(i, out[i])) out[i] = t;
    return out;
}

}  // namespace

TEST(Canonicalize, MergesTransitively) {
    const ConstraintSet c = canonicalize({{1, 2}, {2, 3}}, {});
    EXPECT_EQ(c.must_groups, (std::vector<std::vector<int>>{{1, 2, 3}}));
}

TEST(Canonicalize, DirectConflictThrowsWithIds) {
    try {
        canonicalize({{1, 2}}, {{1, 2}});
        FAIL() << "expected contradiction_error";
    } catch (const contradiction_error& e) {
        EXPECT_EQ(e.ids(), (std::vector<int>{1, 2}));
    }
}

TEST(Canonicalize, ConflictAfterMergeThrows) {
    EXPECT_THROW(canonicalize({{1, 2}, {2, 3}}, {{3, 1}}), contradiction_error);
}

TEST(Canonicalize, NormalizesCannotPairs) {
    const ConstraintSet c = canonicalize({{4, 3}}, {{5, 1}, {1, 5}, {2, 0}});
    EXPECT_EQ(c.must_groups, (std::vector<std::vector<int>>{{3, 4}}));
    EXPECT_EQ(c.cannot_pairs, (std::vector<std::pair<int, int>>{{0, 2}, {1, 5}}));
}

TEST(Canonicalize, SingletonGroupsVanish) {
    EXPECT_TRUE(canonicalize({{7}, {}}, {}).empty());
}

TEST(Bounds, FromFractions) {
    const BalanceBounds b = bounds_from_fractions(200, 5, 0.9, 1.1);
    EXPECT_EQ(b.lower, 36u);
    EXPECT_EQ(b.upper, 44u);
}

TEST(Bounds, NudgedBackIntoFeasibility) {
    std::string note;
    const BalanceBounds b = bounds_from_fractions(10, 3, 1.0, 1.0, &note);
    EXPECT_LE(3 * b.lower, 10u);
    EXPECT_GE(3 * b.upper, 10u);
    EXPECT_EQ(b.lower, 3u);
    EXPECT_EQ(b.upper, 4u);
    EXPECT_TRUE(note.empty());
    bounds_from_fractions(10, 4, 1.6, 1.6, &note);
    EXPECT_FALSE(note.empty());
}

TEST(AssignmentCost, TwoClusterHandComputation) {
    const Matrix<double> c = assignment_cost(matrix({{3, 1}}));
    EXPECT_EQ(c(0, 0), 0.0);
    EXPECT_EQ(c(0, 1), 3.0);
}

TEST(AssignmentCost, FlatRowCostsKMinusOne) {
    const Matrix<double> c = assignment_cost(matrix({{2, 2, 2, 2}}));
    for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(c(0, t), 3.0);
}

TEST(AssignmentCost, RowShiftInvariant) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    Matrix<double> s(6, 3), shifted(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        const double d = u(rng) * 10.0;
        for (std::size_t t = 0; t < 3; ++t) {
            s(i, t) = u(rng);
            shifted(i, t) = s(i, t) + d;
        }
    }
    const Matrix<double> a = assignment_cost(s), b = assignment_cost(shifted);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(a(i, t), b(i, t), 1e-9);
}

TEST(SolveExact, CannotLinkForcesSplit) {
    const Matrix<double> cost = matrix({{1, 1}, {1, 1}});
    const AssignmentResult r = solve_exact(cost, canonicalize({}, {{0, 1}}), {0, 2});
    ASSERT_TRUE(r.feasible);
    EXPECT_NE(r.assignment.sample_cluster[0], r.assignment.sample_cluster[1]);
    EXPECT_EQ(r.total_cost, 2.0);
}

TEST(SolveExact, MustGroupGoesWhereItsSumIsLower) {
    const Matrix<double> cost = matrix({{1, 4}, {3, 1}, {2, 2}});
    const ConstraintSet cons = canonicalize({{0, 1}}, {});
    const BalanceBounds b{1, 3};
    const AssignmentResult r = solve_exact(cost, cons, b);
    const oracle::Enumerated e = oracle::enumerate(cost, cons, b);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.assignment.sample_cluster, e.assignment);
    EXPECT_EQ(r.assignment.sample_cluster, (std::vector<std::size_t>{0, 0, 1}));
    EXPECT_EQ(r.assignment.group_cluster, (std::vector<std::size_t>{0}));
}

TEST(SolveExact, UnconstrainedIsRowArgmin) {
    const Matrix<double> cost = matrix({{3, 1, 2}, {0, 5, 5}, {4, 4, 1}, {2, 1, 9}});
    const AssignmentResult r = solve_exact(cost, {}, {0, 4});
    EXPECT_EQ(r.assignment.sample_cluster, row_argmin(cost));
}

TEST(SolveExact, ReportsInfeasible) {
    const Matrix<double> cost = matrix({{1, 1}, {1, 1}, {1, 1}});
    const ConstraintSet cons = canonicalize({}, {{0, 1}, {1, 2}, {0, 2}});
    EXPECT_FALSE(solve_exact(cost, cons, {0, 3}).feasible);
}

TEST(SolveExact, RefusesHugeInstances) {
    const Matrix<double> cost(30, 3, 1.0);
    EXPECT_THROW(solve_exact(cost, {}, {0, 30}), instance_too_large);
}

TEST(SolveExact, MatchesEnumerationIncludingTies) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const oracle::RandomInstance inst = oracle::random_instance(rng);
        const AssignmentResult r = solve_exact(inst.cost, inst.cons, inst.bounds);
        const oracle::Enumerated e = oracle::enumerate(inst.cost, inst.cons, inst.bounds);
        ASSERT_EQ(r.feasible, e.feasible) << "trial " << trial;
        if (!e.feasible) continue;
        EXPECT_EQ(r.total_cost, e.cost) << "trial " << trial;
        EXPECT_EQ(r.assignment.sample_cluster, e.assignment) << "trial " << trial;
    }
}

TEST(SolveHeuristic, UnconstrainedIsRowArgmin) {
    const Matrix<double> cost = matrix({{3, 1, 2}, {0, 5, 5}, {4, 4, 1}, {2, 1, 9}});
    const AssignmentResult r = solve_heuristic(cost, {}, {0, 4}, 0);
    EXPECT_EQ(r.assignment.sample_cluster, row_argmin(cost));
}

TEST(SolveHeuristic, NearExactAndAlwaysValid) {
    std::mt19937_64 rng(7);
    int close = 0, feasible = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const oracle::RandomInstance inst = oracle::random_instance(rng);
        const AssignmentResult ex = solve_exact(inst.cost, inst.cons, inst.bounds);
        const AssignmentResult h = solve_heuristic(inst.cost, inst.cons, inst.bounds, trial);
        if (!ex.feasible) {
            EXPECT_FALSE(h.feasible);
            ++close;
            continue;
        }
        ++feasible;
        if (!h.feasible) continue;
        EXPECT_TRUE(validate(h.assignment, inst.cons, inst.bounds, inst.k).empty());
        EXPECT_GE(h.total_cost, ex.total_cost - 1e-9);
        close += h.total_cost <= 1.05 * ex.total_cost + 1e-12;
    }
    EXPECT_GE(close, 95);
    EXPECT_GT(feasible, 50);
}

TEST(SolveHeuristic, FindsPackingWithLargeGroups) {
    // Two must groups that each fill a cluster; a cost-first greedy would stack them.
    const std::size_t n = 12;
    Matrix<double> cost(n, 3, 0.0);
    for (std::size_t i = 0; i < n; ++i) cost(i, 1) = cost(i, 2) = 5.0;
    const ConstraintSet cons = canonicalize({{0, 1, 2, 3}, {4, 5, 6, 7}}, {});
    const BalanceBounds b{4, 4};
    const AssignmentResult r = solve_heuristic(cost, cons, b, 3);
    ASSERT_TRUE(r.feasible);
    EXPECT_TRUE(validate(r.assignment, cons, b, 3).empty());
}

TEST(SolveHeuristic, WarmStartIsHonored) {
    const Matrix<double> cost = matrix({{0, 1}, {0, 1}, {1, 0}, {1, 0}});
    const std::vector<std::size_t> start{0, 0, 1, 1};
    const AssignmentResult r = solve_heuristic(cost, {}, {2, 2}, 0, &start);
    EXPECT_EQ(r.assignment.sample_cluster, start);
}

TEST(Validate, ValidAssignmentIsClean) {
    Assignment a;
    a.sample_cluster = {0, 0, 1, 1};
    EXPECT_TRUE(validate(a, canonicalize({{0, 1}}, {{1, 2}}), {2, 2}, 2).empty());
}

TEST(Validate, SplitMustGroupNamesIds) {
    Assignment a;
    a.sample_cluster = {0, 1, 1, 0};
    const auto v = validate(a, canonicalize({{0, 1}}, {}), {0, 4}, 2);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, violation_kind::must_split);
    EXPECT_EQ(v[0].ids, (std::vector<int>{0, 1}));
}

TEST(Validate, JoinedCannotPair) {
    Assignment a;
    a.sample_cluster = {0, 0, 1, 1};
    const auto v = validate(a, canonicalize({}, {{0, 1}}), {0, 4}, 2);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, violation_kind::cannot_joined);
}

TEST(Validate, SizeBelowLower) {
    Assignment a;
    a.sample_cluster = {0, 0, 0, 1};
    const auto v = validate(a, {}, {2, 3}, 2);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, violation_kind::below_lower);
}

TEST(Validate, UnassignedSample) {
    Assignment a;
    a.sample_cluster = {0, unassigned, 1};
    const auto v = validate(a, {}, {0, 3}, 2);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, violation_kind::unassigned);
    EXPECT_EQ(v[0].ids, (std::vector<int>{1}));
}

TEST(Validate, SubsetOfSatisfiedConstraintsIsSatisfied) {
    Assignment a;
    a.sample_cluster = {0, 0, 1, 1, 0};
    const ConstraintSet full = canonicalize({{0, 1, 4}, {2, 3}}, {{0, 2}, {1, 3}});
    const ConstraintSet part = canonicalize({{0, 4}}, {{1, 3}});
    ASSERT_TRUE(validate(a, full, {2, 3}, 2).empty());
    EXPECT_TRUE(validate(a, part, {2, 3}, 2).empty());
}

TEST(Units, CannotInsideGroupIsContradiction) {
    ConstraintSet c;
    c.must_groups = {{0, 1}};
    c.cannot_pairs = {{0, 1}};
    EXPECT_THROW(make_units(3, c), contradiction_error);
}

TEST(Units, UnknownIdIsReported) {
    try {
        make_units(3, canonicalize({{1, 9}}, {}));
        FAIL() << "expected id_error";
    } catch (const id_error& e) {
        EXPECT_EQ(e.ids(), (std::vector<int>{9}));
    }
}
