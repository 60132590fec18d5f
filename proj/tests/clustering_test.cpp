#include "phrl/clustering.hpp"

#include "dtw_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace phrl;
using namespace phrl::testing;

namespace {

double scalar_distance(double x, double y) { return std::abs(x - y); }

double scalar_dtw(const std::vector<double>& a, const std::vector<double>& b) {
    return dtw(std::span<const double>(a), std::span<const double>(b), scalar_distance);
}

}  // namespace

TEST(Dtw, Examples) {
    EXPECT_EQ(scalar_dtw({0, 0}, {1, 1}), 2.0);
    EXPECT_EQ(brute_force_alignment_cost<double>({0, 0}, {1, 1}, scalar_distance), 2.0);
    EXPECT_EQ(scalar_dtw({1, 2, 3}, {1, 2, 2, 3}), 0.0);
    EXPECT_EQ(brute_force_alignment_cost<double>({1, 2, 3}, {1, 2, 2, 3}, scalar_distance), 0.0);
    EXPECT_EQ(scalar_dtw({1, 5, 2}, {1, 5, 2}), 0.0);
}

TEST(Dtw, EmptySequenceIsAnError) {
    EXPECT_THROW(scalar_dtw({}, {1.0}), EmptySequence);
    EXPECT_THROW(scalar_dtw({1.0}, {}), EmptySequence);
}

TEST(Dtw, MatchesExhaustiveAlignmentForShortSequences) {
    Rng rng(4);
    for (std::size_t n = 1; n <= 5; ++n) {
        for (std::size_t m = 1; m <= 5; ++m) {
            const auto a = random_elements(rng, n);
            const auto b = random_elements(rng, m);
            const double expected = brute_force_alignment_cost(a, b, euclidean);
            EXPECT_NEAR(dtw(std::span<const DayTraceElement>(a), std::span<const DayTraceElement>(b)), expected,
                        1e-12 * std::max(1.0, expected));
        }
    }
}

TEST(Dtw, SymmetricNonnegativeZeroOnSelf) {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_elements(rng, 1 + rng.uniform_index(6), true);
        const auto b = random_elements(rng, 1 + rng.uniform_index(6), true);
        const std::span<const DayTraceElement> sa(a), sb(b);
        EXPECT_EQ(dtw(sa, sb), dtw(sb, sa));
        EXPECT_GE(dtw(sa, sb), 0.0);
        EXPECT_EQ(dtw(sa, sa), 0.0);
    }
}

TEST(UserDistance, IdenticalUsersAreAtZero) {
    Rng rng(1);
    const auto t = synthetic_trace("a", true, rng);
    EXPECT_EQ(user_distance(t, t), 0.0);
}

TEST(UserDistance, AdditiveOverDays) {
    Rng rng(2);
    const auto a = synthetic_trace("a", true, rng, 2);
    auto b = a;
    b.user_id = "b";
    b.days[1][1].reward += 0.4;
    b.days[1][2].state.number_message_received = 3;

    const auto ranges = NormalizationRanges::defaults();
    const auto a1 = normalize(a.days.at(1), ranges);
    const auto b1 = normalize(b.days.at(1), ranges);
    const double day_cost = brute_force_alignment_cost(a1, b1, euclidean);
    EXPECT_GT(day_cost, 0.0);
    EXPECT_NEAR(user_distance(a, b), day_cost, 1e-12);

    // two differing days: matches the day-wise enumeration sum
    b.days[0][0].state.number_rating = 9;
    const auto a0 = normalize(a.days.at(0), ranges);
    const auto b0 = normalize(b.days.at(0), ranges);
    const double expected = brute_force_alignment_cost(a0, b0, euclidean) +
                            brute_force_alignment_cost(a1, normalize(b.days.at(1), ranges), euclidean);
    EXPECT_NEAR(user_distance(a, b), expected, 1e-12);
}

TEST(UserDistance, MissingDayComparesAgainstZeroElement) {
    Rng rng(3);
    const auto a = synthetic_trace("a", true, rng, 2);
    Trace b = a;
    b.days.erase(1);
    const auto seq = normalize(a.days.at(1), NormalizationRanges::defaults());
    const std::vector<DayTraceElement> zero(1);
    EXPECT_NEAR(user_distance(a, b), brute_force_alignment_cost(seq, zero, euclidean), 1e-12);
    EXPECT_NEAR(user_distance(a, b), user_distance(b, a), 1e-12);
}

TEST(Normalization, ClampsIntoUnitInterval) {
    TraceStep step;
    step.state.number_rating = 500;
    step.reward = 9.0;
    const auto e = normalize(step, NormalizationRanges::defaults());
    for (double v : e.values) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(e.values[1], 1.0);
    EXPECT_EQ(e.values[kFeatureCount], 1.0);
}

TEST(DistanceMatrix, EachPairEvaluatedOnce) {
    int calls = 0;
    const auto m = distance_matrix(7, [&](std::size_t i, std::size_t j) {
        ++calls;
        return static_cast<double>(i + j);
    });
    EXPECT_EQ(calls, 7 * 6 / 2);
    EXPECT_TRUE(m.well_formed());
    EXPECT_EQ(m(2, 5), 7.0);
    EXPECT_EQ(m(5, 2), 7.0);
}

TEST(DistanceMatrix, IdenticalUsersGiveZeroMatrix) {
    Rng rng(6);
    auto t = synthetic_trace("a", true, rng);
    auto u = t;
    u.user_id = "b";
    const std::vector<Trace> traces{t, u};
    const auto m = distance_matrix(traces);
    EXPECT_EQ(m(0, 1), 0.0);
    EXPECT_EQ(m(1, 0), 0.0);
    EXPECT_TRUE(m.well_formed());
}

TEST(DistanceMatrix, ThreadedFillMatchesSequential) {
    Rng rng(7);
    std::vector<Trace> traces;
    for (int i = 0; i < 9; ++i) traces.push_back(synthetic_trace("u" + std::to_string(i), i % 2 == 0, rng));
    const auto seq = distance_matrix(traces, NormalizationRanges::defaults(), 1);
    const auto par = distance_matrix(traces, NormalizationRanges::defaults(), 4);
    for (std::size_t i = 0; i < traces.size(); ++i)
        for (std::size_t j = 0; j < traces.size(); ++j) EXPECT_EQ(seq(i, j), par(i, j));
}

TEST(KMedoids, KEqualsNGivesZeroCost) {
    const auto m = distance_matrix(5, [](std::size_t i, std::size_t j) { return 1.0 + static_cast<double>(i * j); });
    const auto r = k_medoids(m, 5, 1);
    EXPECT_EQ(r.total_cost, 0.0);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.assignment[i], static_cast<int>(i));
}

TEST(KMedoids, SingleClusterMinimizesColumnSum) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = distance_matrix(9, [&](std::size_t, std::size_t) { return rng.uniform01() * 10.0; });
        std::size_t best = 0;
        double best_sum = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < 9; ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < 9; ++r) sum += m(r, c);
            if (sum < best_sum) {
                best_sum = sum;
                best = c;
            }
        }
        const auto r = k_medoids(m, 1, static_cast<std::uint64_t>(trial));
        EXPECT_EQ(r.medoids.front(), best);
        EXPECT_NEAR(r.total_cost, best_sum, 1e-12);
    }
}

TEST(KMedoids, CostNeverIncreasesAndSeedIsDeterministic) {
    Rng rng(10);
    const auto m = distance_matrix(25, [&](std::size_t, std::size_t) { return rng.uniform01(); });
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = k_medoids(m, 4, seed);
        for (std::size_t i = 1; i < r.cost_history.size(); ++i) EXPECT_LE(r.cost_history[i], r.cost_history[i - 1]);
        const auto again = k_medoids(m, 4, seed);
        EXPECT_EQ(r.medoids, again.medoids);
        EXPECT_EQ(r.assignment, again.assignment);
    }
}

TEST(KMedoids, KLargerThanNFails) {
    const auto m = distance_matrix(3, [](std::size_t, std::size_t) { return 1.0; });
    EXPECT_THROW(k_medoids(m, 4, 0), std::invalid_argument);
    EXPECT_THROW(k_medoids(m, 0, 0), std::invalid_argument);
}

TEST(KMedoids, RecoversRespondersAndDormantUsers) {
    Rng rng(15);
    std::vector<Trace> traces;
    std::vector<int> truth;
    for (int i = 0; i < 20; ++i) {
        const bool responder = i % 3 != 0;
        traces.push_back(synthetic_trace("u" + std::to_string(i), responder, rng));
        truth.push_back(responder ? 1 : 0);
    }
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto model = cluster_users(traces, 2, seed);
        EXPECT_NO_THROW(model.validate());
        std::vector<int> labels;
        for (const auto& t : traces) labels.push_back(model.assignment.at(t.user_id));
        EXPECT_GE(rand_index(labels, truth), 0.9);
    }
}

TEST(AssignUser, MedoidsAndResponders) {
    Rng rng(16);
    std::vector<Trace> traces;
    for (int i = 0; i < 12; ++i) traces.push_back(synthetic_trace("u" + std::to_string(i), i < 6, rng));
    const auto model = cluster_users(traces, 2, 3);
    for (int c = 0; c < model.k; ++c) EXPECT_EQ(assign_user(model.medoid_traces[static_cast<std::size_t>(c)], model), c);

    const int responder_cluster = model.assignment.at("u0");
    Rng fresh(99);
    EXPECT_EQ(assign_user(synthetic_trace("new", true, fresh), model), responder_cluster);
    EXPECT_NE(assign_user(synthetic_trace("new2", false, fresh), model), responder_cluster);
}

TEST(AssignUser, EquidistantGoesToFirstCluster) {
    Trace left, right, middle;
    TraceStep a, b, mid;
    a.reward = 0.0;
    b.reward = 2.0;
    mid.reward = 1.0;
    left.user_id = "l";
    right.user_id = "r";
    middle.user_id = "m";
    left.days[0] = {a};
    right.days[0] = {b};
    middle.days[0] = {mid};
    ClusterModel model;
    model.k = 2;
    model.medoid_users = {"l", "r"};
    model.medoid_traces = {left, right};
    model.assignment = {{"l", 0}, {"r", 1}};
    EXPECT_NO_THROW(model.validate());
    EXPECT_EQ(assign_user(middle, model), 0);
}

TEST(ClusterModel, ConfigHashDependsOnSettings) {
    const auto r = NormalizationRanges::defaults();
    EXPECT_EQ(cluster_config_hash(2, 7, r), cluster_config_hash(2, 7, r));
    EXPECT_NE(cluster_config_hash(2, 7, r), cluster_config_hash(3, 7, r));
    EXPECT_NE(cluster_config_hash(2, 7, r), cluster_config_hash(2, 8, r));
}
