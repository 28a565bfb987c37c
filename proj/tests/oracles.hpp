#pragma once

// Numerical oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "mmbeam/ddqn.hpp"
#include "mmbeam/topology.hpp"
#include "mmbeam/traffic.hpp"

namespace oracles {

inline mmbeam::Mlp random_net(std::vector<int> dims, std::uint64_t seed)
{
    mmbeam::Mlp net(std::move(dims));
    std::mt19937_64 rng(seed);
    net.init_glorot(rng);
    std::normal_distribution<double> n(0.0, 0.1);
    for (int l = 0; l < net.layers(); ++l) {
        for (int o = 0; o < net.dims()[static_cast<std::size_t>(l) + 1]; ++o) {
            net.params()[net.bias_offset(l) + static_cast<std::size_t>(o)] = n(rng);
        }
    }
    return net;
}

/// Worst relative error between backprop and central differences over
/// `samples` random inputs and every parameter of every layer.
inline double gradient_check(const std::vector<int>& dims, int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0.0;
    for (int sample = 0; sample < samples; ++sample) {
        mmbeam::Mlp net = random_net(dims, seed * 1000 + static_cast<std::uint64_t>(sample));
        std::vector<double> x(static_cast<std::size_t>(dims.front()));
        for (double& v : x) {
            v = u(rng);
        }
        std::vector<double> c(static_cast<std::size_t>(dims.back()));
        for (double& v : c) {
            v = n(rng);
        }
        auto loss = [&](const mmbeam::Mlp& m) {
            const auto y = m.forward(x);
            double s = 0.0;
            for (std::size_t o = 0; o < y.size(); ++o) {
                s += c[o] * y[o];
            }
            return s;
        };
        mmbeam::Mlp::Trace trace;
        net.forward(x, trace);
        std::vector<double> grads(net.param_count(), 0.0);
        net.backward(trace, c, grads);
        const double h = 1e-5;
        for (std::size_t k = 0; k < net.param_count(); ++k) {
            const double keep = net.params()[k];
            net.params()[k] = keep + h;
            const double up = loss(net);
            net.params()[k] = keep - h;
            const double down = loss(net);
            net.params()[k] = keep;
            const double numeric = (up - down) / (2.0 * h);
            const double scale = std::max({std::abs(numeric), std::abs(grads[k]), 1e-6});
            worst = std::max(worst, std::abs(numeric - grads[k]) / scale);
        }
    }
    return worst;
}

struct ToyMdp {
    static constexpr double gamma = 0.9;
    // Action 1 switches state, action 0 stays.
    static constexpr std::array<std::array<double, 2>, 2> reward{{{0.0, 1.0}, {0.5, 0.0}}};
    static int next(int s, int a) { return a == 1 ? 1 - s : s; }

    static std::array<std::array<double, 2>, 2> value_iteration()
    {
        std::array<std::array<double, 2>, 2> q{};
        for (int it = 0; it < 5000; ++it) {
            auto nq = q;
            for (int s = 0; s < 2; ++s) {
                for (int a = 0; a < 2; ++a) {
                    const auto& q2 = q[static_cast<std::size_t>(next(s, a))];
                    nq[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
                        reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] + gamma * std::max(q2[0], q2[1]);
                }
            }
            q = nq;
        }
        return q;
    }
};

/// Trains the (3B, 128, 256, B) network with B = 2 on the toy MDP, states
/// one-hot in the first two of 3B inputs; returns the L-infinity error to Q*.
inline double toy_mdp_error(int steps, std::uint64_t seed)
{
    mmbeam::Hyperparams hp;
    hp.gamma = ToyMdp::gamma;
    hp.learning_rate = 1e-3;
    hp.batch_size = 32;
    hp.target_sync_period = 25;
    std::mt19937_64 init(seed);
    mmbeam::Mlp net({6, 128, 256, 2});
    net.init_glorot(init);
    mmbeam::DdqnLearner learner(std::move(net), hp);
    auto encode = [](int s) {
        std::vector<double> x(6, 0.0);
        x[static_cast<std::size_t>(s)] = 1.0;
        return x;
    };
    // Eight copies of each transition fill exactly one batch.
    for (int copy = 0; copy < 8; ++copy) {
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 2; ++a) {
                learner.replay.push(mmbeam::Experience{encode(s), a,
                                                   ToyMdp::reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)],
                                                   encode(ToyMdp::next(s, a)), false});
            }
        }
    }
    std::mt19937_64 rng(seed + 1);
    for (int k = 0; k < steps; ++k) {
        mmbeam::train_step(learner, rng);
    }
    const auto q = ToyMdp::value_iteration();
    double linf = 0.0;
    for (int s = 0; s < 2; ++s) {
        const auto out = learner.online.forward(encode(s));
        for (int a = 0; a < 2; ++a) {
            linf = std::max(linf, std::abs(out[static_cast<std::size_t>(a)] -
                                           q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
        }
    }
    return linf;
}

/// Empirical packets per second of one FTP3 source over `seconds`.
inline double empirical_arrival_rate(const mmbeam::TrafficConfig& cfg, double seconds, double dt, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::int64_t id = 0;
    std::size_t count = 0;
    const auto steps = static_cast<long long>(std::llround(seconds / dt));
    for (long long k = 0; k < steps; ++k) {
        count += mmbeam::ftp3_arrivals(cfg, static_cast<double>(k) * dt, dt, rng, id).size();
    }
    return static_cast<double>(count) / seconds;
}

} // namespace oracles
