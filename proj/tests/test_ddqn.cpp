#include <chrono>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mmbeam/ddqn.hpp"
#include "oracles.hpp"

using namespace mmbeam;

namespace {

// Net with two outputs whose values are set directly through the output bias.
Mlp constant_q(std::vector<double> q)
{
    Mlp net({1, static_cast<int>(q.size())});
    for (std::size_t o = 0; o < q.size(); ++o) {
        net.params()[net.bias_offset(0) + o] = q[o];
    }
    return net;
}

} // namespace

TEST(Mlp, ZeroParamsGiveZeroOutput)
{
    const Mlp net({144, 128, 256, 48});
    const auto y = net.forward(std::vector<double>(144, 0.7));
    ASSERT_EQ(y.size(), 48u);
    for (double v : y) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Mlp, InputLengthChecked)
{
    const Mlp net({6, 4, 2});
    EXPECT_THROW(net.forward(std::vector<double>(5, 0.0)), ValidationError);
}

TEST(Mlp, GradientMatchesFiniteDifferences)
{
    EXPECT_LT(oracles::gradient_check({12, 16, 16, 5}, 100, 77), 1e-4);
}

TEST(Mlp, BatchPassesMatchSingleSamplePasses)
{
    const Mlp net = oracles::random_net({7, 11, 13, 5}, 4);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> xs(6, std::vector<double>(7));
    std::vector<std::vector<double>> ds(6, std::vector<double>(5));
    for (auto& x : xs) {
        for (double& v : x) {
            v = n(rng);
        }
    }
    xs[2][3] = 0.0;
    for (auto& d : ds) {
        for (double& v : d) {
            v = n(rng);
        }
    }
    std::vector<std::span<const double>> views(xs.begin(), xs.end());
    Mlp::BatchTrace batch;
    net.forward_batch(views, batch);
    std::vector<double> flat_d;
    std::vector<double> single_grads(net.param_count(), 0.0);
    for (std::size_t r = 0; r < xs.size(); ++r) {
        Mlp::Trace trace;
        net.forward(xs[r], trace);
        const auto out = batch.output(r);
        for (std::size_t o = 0; o < out.size(); ++o) {
            EXPECT_NEAR(out[o], trace.act.back()[o], 1e-12);
        }
        net.backward(trace, ds[r], single_grads);
        flat_d.insert(flat_d.end(), ds[r].begin(), ds[r].end());
    }
    std::vector<double> batch_grads(net.param_count(), 0.0);
    net.backward_batch(batch, flat_d, batch_grads);
    for (std::size_t k = 0; k < batch_grads.size(); ++k) {
        EXPECT_NEAR(batch_grads[k], single_grads[k], 1e-12);
    }
}

TEST(Targets, DecoupledArgmax)
{
    const Mlp online = constant_q({1.0, 2.0});
    const Mlp target = constant_q({10.0, 3.0});
    Experience e{{0.0}, 0, 0.5, {0.0}, false};
    const std::vector<const Experience*> batch{&e};
    EXPECT_NEAR(ddqn_targets(batch, online, target, 0.9)[0], 3.2, 1e-12);
    // Vanilla DQN would read the target's own maximum.
    EXPECT_NEAR(ddqn_targets(batch, target, target, 0.9)[0], 9.5, 1e-12);
}

TEST(Targets, TerminalAndZeroDiscount)
{
    const Mlp online = constant_q({1.0, 2.0});
    const Mlp target = constant_q({10.0, 3.0});
    Experience done{{0.0}, 1, 0.25, {0.0}, true};
    Experience live{{0.0}, 1, 0.75, {0.0}, false};
    const std::vector<const Experience*> batch{&done, &live};
    const auto y = ddqn_targets(batch, online, target, 0.9);
    EXPECT_EQ(y[0], 0.25);
    const auto y0 = ddqn_targets(batch, online, target, 0.0);
    EXPECT_EQ(y0[0], 0.25);
    EXPECT_EQ(y0[1], 0.75);
}

TEST(Adam, FirstStepClosedForm)
{
    std::vector<double> w{1.0};
    const std::vector<double> g{1.0};
    AdamState st(1);
    adam_step(w, g, st, AdamConfig{});
    EXPECT_NEAR(w[0], 1.0 - 1e-4 / (1.0 + 1e-8), 1e-15);
    EXPECT_NEAR(w[0], 0.9999, 1e-9);
}

TEST(Adam, NoMovement)
{
    std::vector<double> w{0.3, -2.0};
    const std::vector<double> zero{0.0, 0.0};
    AdamState st(2);
    adam_step(w, zero, st, AdamConfig{});
    EXPECT_EQ(w[0], 0.3);
    EXPECT_EQ(w[1], -2.0);
    AdamConfig frozen;
    frozen.learning_rate = 0.0;
    const std::vector<double> g{5.0, -1.0};
    adam_step(w, g, st, frozen);
    EXPECT_EQ(w[0], 0.3);
    EXPECT_EQ(w[1], -2.0);
}

TEST(Adam, NonFiniteGradient)
{
    std::vector<double> w{0.0};
    const std::vector<double> g{std::nan("")};
    AdamState st(1);
    EXPECT_THROW(adam_step(w, g, st, AdamConfig{}), InvariantViolation);
}

TEST(Epsilon, LinearSchedule)
{
    const EpsilonSchedule s{1.0, 0.05, 1000};
    EXPECT_EQ(epsilon_at(0, s), 1.0);
    EXPECT_NEAR(epsilon_at(500, s), 0.525, 1e-12);
    EXPECT_EQ(epsilon_at(1000, s), 0.05);
    EXPECT_EQ(epsilon_at(5000, s), 0.05);
    EXPECT_THROW(epsilon_at(-1, s), ValidationError);
}

TEST(Replay, RingOverwritesOldest)
{
    ReplayBuffer r(3);
    for (int k = 0; k < 5; ++k) {
        r.push(Experience{{0.0}, k, 0.0, {0.0}, false});
    }
    EXPECT_EQ(r.size(), 3u);
    EXPECT_EQ(r.at(0).action, 2);
    EXPECT_EQ(r.at(2).action, 4);
}

TEST(Replay, SamplingIsUniform)
{
    ReplayBuffer r(24);
    for (int k = 0; k < 24; ++k) {
        r.push(Experience{{0.0}, k, 0.0, {0.0}, false});
    }
    std::mt19937_64 rng(31);
    std::vector<long long> counts(24, 0);
    for (int k = 0; k < 2000; ++k) {
        for (const Experience* e : r.sample(50, rng)) {
            ++counts[e->action];
        }
    }
    const double expected = 100000.0 / 24.0;
    double chi2 = 0.0;
    for (long long c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
    }
    EXPECT_LT(chi2, 41.638); // 0.99 quantile, 23 degrees of freedom
}

namespace {

std::vector<Experience> random_batch(int n, int in, int actions, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> a(0, actions - 1);
    std::vector<Experience> out;
    for (int k = 0; k < n; ++k) {
        Experience e;
        e.state.resize(in);
        e.next_state.resize(in);
        for (int i = 0; i < in; ++i) {
            e.state[i] = u(rng);
            e.next_state[i] = u(rng);
        }
        e.action = a(rng);
        e.reward = u(rng);
        out.push_back(e);
    }
    return out;
}

} // namespace

TEST(Train, FrozenBatchLossDecreases)
{
    Hyperparams hp;
    const auto data = random_batch(32, 72, 24, 4);
    std::vector<const Experience*> batch;
    for (const auto& e : data) {
        batch.push_back(&e);
    }
    Mlp online = oracles::random_net({72, 128, 256, 24}, 9);
    const Mlp target = online;
    AdamState opt(online.param_count());
    double prev = train_on_batch(batch, online, target, opt, hp);
    EXPECT_GE(prev, 0.0);
    for (int k = 1; k < 50; ++k) {
        const double loss = train_on_batch(batch, online, target, opt, hp);
        EXPECT_GE(loss, 0.0);
        EXPECT_LT(loss, prev) << "step " << k;
        prev = loss;
    }
}

TEST(Train, TargetFrozenBetweenSyncs)
{
    Hyperparams hp;
    hp.target_sync_period = 5;
    hp.batch_size = 8;
    hp.learning_rate = 1e-3;
    DdqnLearner learner(oracles::random_net({6, 8, 3}, 2), hp);
    for (auto& e : random_batch(20, 6, 3, 5)) {
        learner.replay.push(e);
    }
    std::mt19937_64 rng(1);
    const auto initial = learner.target.params();
    for (int k = 1; k <= 4; ++k) {
        ASSERT_TRUE(train_step(learner, rng).has_value());
        EXPECT_EQ(learner.target.params(), initial);
        EXPECT_NE(learner.online.params(), initial);
    }
    train_step(learner, rng);
    EXPECT_EQ(learner.target.params(), learner.online.params());
}

TEST(Train, NoStepWhileReplayUnderfull)
{
    Hyperparams hp;
    hp.batch_size = 32;
    DdqnLearner learner(oracles::random_net({6, 8, 3}, 2), hp);
    for (auto& e : random_batch(31, 6, 3, 5)) {
        learner.replay.push(e);
    }
    std::mt19937_64 rng(1);
    EXPECT_FALSE(train_step(learner, rng).has_value());
    EXPECT_EQ(learner.train_steps, 0);
}

TEST(Train, ToyMdpConvergesToValueIteration)
{
    const auto q = oracles::ToyMdp::value_iteration();
    EXPECT_NEAR(q[0][0], 4.95, 1e-9);
    EXPECT_NEAR(q[0][1], 5.5, 1e-9);
    EXPECT_NEAR(q[1][0], 5.0, 1e-9);
    EXPECT_NEAR(q[1][1], 4.95, 1e-9);
    const auto start = std::chrono::steady_clock::now();
    EXPECT_LT(oracles::toy_mdp_error(3000, 3), 1e-2);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 60.0);
}

TEST(Checkpoint, RoundTripIsBitExact)
{
    const Mlp net = oracles::random_net({9, 7, 3}, 21);
    Hyperparams hp;
    hp.gamma = 0.87;
    hp.batch_size = 16;
    std::stringstream buf;
    write_checkpoint(buf, net, hp, 1234);
    const auto ck = read_checkpoint(buf);
    EXPECT_EQ(ck.net.dims(), net.dims());
    EXPECT_EQ(ck.net.params(), net.params());
    EXPECT_EQ(ck.hp.gamma, 0.87);
    EXPECT_EQ(ck.hp.batch_size, 16);
    EXPECT_EQ(ck.train_steps, 1234);
}

TEST(Checkpoint, CorruptInputsRejected)
{
    std::stringstream bad("not a checkpoint\n");
    EXPECT_THROW(read_checkpoint(bad), ValidationError);
    const Mlp net = oracles::random_net({3, 2}, 1);
    std::stringstream buf;
    write_checkpoint(buf, net, Hyperparams{}, 0);
    std::string s = buf.str();
    s.resize(s.size() - 8);
    std::stringstream truncated(s);
    EXPECT_THROW(read_checkpoint(truncated), ValidationError);
}
