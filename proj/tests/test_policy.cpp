#include <random>

#include <gtest/gtest.h>

#include "mmbeam/policy.hpp"

using namespace mmbeam;

namespace {

RsrpReport report_with(int mt, std::vector<double> raw) { return make_report(mt, std::move(raw), 0); }

AgentState zero_state(int beams)
{
    return assemble_state(std::vector<double>(beams, 0.0), std::vector<double>(beams, 0.0),
                          std::vector<double>(beams, 0.0));
}

// A linear net whose output is fixed by the biases.
Mlp constant_q(int beams, const std::vector<double>& q)
{
    Mlp net({3 * beams, beams});
    for (int o = 0; o < beams; ++o) {
        net.params()[net.bias_offset(0) + o] = q[o];
    }
    return net;
}

CorrelationMatrix random_rho(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    CorrelationMatrix rho(n);
    for (int b = 0; b < n; ++b) {
        for (int j = b + 1; j < n; ++j) {
            rho.set(b, j, dist(rng));
        }
    }
    return rho;
}

} // namespace

TEST(Baseline, UniqueMaximum)
{
    std::vector<double> raw(24, -120.0);
    raw[7] = -70.0;
    EXPECT_EQ(baseline_select(report_with(0, raw)), 7);
}

TEST(Baseline, TieTakesLowestIndex)
{
    std::vector<double> raw(24, -120.0);
    raw[3] = -70.0;
    raw[9] = -70.0;
    EXPECT_EQ(baseline_select(report_with(0, raw)), 3);
}

TEST(Baseline, MatchesExhaustiveScan)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dist(-150.0, -40.0);
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> raw(48);
        for (double& x : raw) {
            x = std::round(dist(rng));
        }
        int best = 0;
        for (int b = 1; b < 48; ++b) {
            if (raw[b] > raw[best]) {
                best = b;
            }
        }
        EXPECT_EQ(baseline_select(report_with(0, raw)), best);
    }
}

TEST(RlSelect, GreedyIsArgmax)
{
    std::vector<double> q(48, 0.0);
    q[12] = 1.0;
    const Mlp net = constant_q(48, q);
    std::mt19937_64 rng(1);
    const auto state = zero_state(48);
    for (int k = 0; k < 20; ++k) {
        EXPECT_EQ(rl_select(state, net, 0.0, rng), 12);
    }
}

TEST(RlSelect, FullExplorationIsUniform)
{
    const Mlp net = constant_q(48, std::vector<double>(48, 0.0));
    std::mt19937_64 rng(2024);
    const auto state = zero_state(48);
    std::vector<long long> counts(48, 0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        ++counts[rl_select(state, net, 1.0, rng)];
    }
    const double expected = static_cast<double>(draws) / 48.0;
    double chi2 = 0.0;
    for (long long c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
    }
    EXPECT_LT(chi2, 72.443); // chi-square 0.99 quantile, 47 degrees of freedom
}

TEST(RlSelect, RejectsBadEpsilon)
{
    const Mlp net = constant_q(4, std::vector<double>(4, 0.0));
    std::mt19937_64 rng(1);
    EXPECT_THROW(rl_select(zero_state(4), net, 1.5, rng), ValidationError);
}

TEST(Assign, FirstMtSeesZeroCorrelation)
{
    const auto rho = random_rho(24, 5);
    const std::vector<int> order{4, 1};
    std::vector<double> raw0(24, -100.0), raw1(24, -100.0);
    raw0[10] = -60.0;
    raw1[2] = -60.0;
    const std::vector<RsrpReport> reports{report_with(4, raw0), report_with(1, raw1)};
    BaselinePolicy policy;
    const auto out = assign_interval(order, reports, std::vector<double>(24, 0.0), rho, 3, policy);
    ASSERT_EQ(out.decisions.size(), 2u);
    for (double c : out.decisions[0].state.c) {
        EXPECT_EQ(c, 0.0);
    }
    EXPECT_EQ(out.decisions[0].action, 10);
    EXPECT_EQ(out.decisions[1].action, 2);
    for (int b = 0; b < 24; ++b) {
        EXPECT_DOUBLE_EQ(out.decisions[1].state.c[b], rho(b, 10) / 2.0);
    }
}

TEST(Assign, BaselinePolicyMatchesPerMtArgmax)
{
    const auto rho = random_rho(24, 6);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-140.0, -50.0);
    std::vector<int> order;
    std::vector<RsrpReport> reports;
    for (int mt = 0; mt < 8; ++mt) {
        std::vector<double> raw(24);
        for (double& x : raw) {
            x = dist(rng);
        }
        order.push_back(mt);
        reports.push_back(report_with(mt, raw));
    }
    BaselinePolicy policy;
    const auto out = assign_interval(order, reports, std::vector<double>(24, 0.1), rho, 3, policy);
    for (std::size_t k = 0; k < order.size(); ++k) {
        EXPECT_EQ(out.decisions[k].action, baseline_select(reports[k]));
        EXPECT_LE(*std::max_element(out.decisions[k].state.c.begin(), out.decisions[k].state.c.end()), 1.0);
    }
}

TEST(Assign, OrderMismatchRejected)
{
    const auto rho = random_rho(4, 1);
    const std::vector<int> order{0, 1};
    const std::vector<RsrpReport> reports{report_with(1, std::vector<double>(4, -90.0)),
                                          report_with(0, std::vector<double>(4, -90.0))};
    BaselinePolicy policy;
    EXPECT_THROW(assign_interval(order, reports, std::vector<double>(4, 0.0), rho, 2, policy), ValidationError);
}

TEST(Rewards, Normalization)
{
    const std::vector<int> mts{0, 1, 2};
    const std::vector<std::int64_t> bytes{300, 600, 0};
    const auto r = compute_rewards(mts, bytes);
    EXPECT_EQ(r[0].reward, 0.5);
    EXPECT_EQ(r[1].reward, 1.0);
    EXPECT_EQ(r[2].reward, 0.0);
    const std::vector<std::int64_t> none{0, 0, 0};
    for (const auto& s : compute_rewards(mts, none)) {
        EXPECT_EQ(s.reward, 0.0);
    }
}

TEST(Rewards, AlwaysInUnitInterval)
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> dist(0, 1 << 20);
    for (int k = 0; k < 200; ++k) {
        std::vector<int> mts(10);
        std::vector<std::int64_t> bytes(10);
        for (int i = 0; i < 10; ++i) {
            mts[i] = i;
            bytes[i] = dist(rng);
        }
        for (const auto& s : compute_rewards(mts, bytes)) {
            EXPECT_GE(s.reward, 0.0);
            EXPECT_LE(s.reward, 1.0);
        }
    }
}

TEST(Transitions, PairingAndCounting)
{
    const int beams = 4;
    auto decision = [&](int mt, int action, double z) {
        return DecisionRecord{mt, assemble_state(std::vector<double>(beams, z), std::vector<double>(beams, 0.0),
                                                 std::vector<double>(beams, 0.0)),
                              action};
    };
    // One MT, two intervals: one transition after the second.
    const std::vector<DecisionRecord> first{decision(0, 1, 0.1)};
    const std::vector<DecisionRecord> second{decision(0, 2, 0.2)};
    const std::vector<RewardSample> r{{0, 10, 1.0}};
    const auto t = close_transitions(first, r, second, false);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].action, 1);
    EXPECT_EQ(t[0].state[0], 0.1);
    EXPECT_EQ(t[0].next_state[0], 0.2);
    EXPECT_FALSE(t[0].done);

    const auto end = close_transitions(second, r, {}, true);
    ASSERT_EQ(end.size(), 1u);
    EXPECT_TRUE(end[0].done);

    // N MTs over K intervals: N(K-1) + N.
    const int n = 5, k = 7;
    std::size_t total = 0;
    std::vector<DecisionRecord> prev;
    std::vector<RewardSample> rewards;
    for (int mt = 0; mt < n; ++mt) {
        rewards.push_back({mt, 0, 0.0});
    }
    for (int interval = 0; interval < k; ++interval) {
        std::vector<DecisionRecord> next;
        for (int mt = n - 1; mt >= 0; --mt) {
            next.push_back(decision(mt, mt % beams, 0.0));
        }
        if (interval > 0) {
            total += close_transitions(prev, rewards, next, false).size();
        }
        prev = next;
    }
    total += close_transitions(prev, rewards, {}, true).size();
    EXPECT_EQ(total, static_cast<std::size_t>(n * (k - 1) + n));
}

TEST(Transitions, MissingPiecesRejected)
{
    const DecisionRecord d{3, assemble_state({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}), 0};
    const std::vector<DecisionRecord> prev{d};
    EXPECT_THROW(close_transitions(prev, {}, prev, false), ValidationError);
    const std::vector<RewardSample> r{{3, 0, 0.0}};
    EXPECT_THROW(close_transitions(prev, r, {}, false), ValidationError);
}
