#pragma once

// Feed-forward Q-network, Adam, uniform experience replay, epsilon schedule
// and the double-DQN update. Everything is plain C++ on std::vector<double>.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mmbeam/error.hpp"

namespace mmbeam {

/// Dense ReLU network; identity on the output layer.
/// Layer l maps dims[l] -> dims[l+1]; its weights are stored input-major
/// (W[i * out + o]) followed by the bias vector.
class Mlp {
public:
    Mlp() = default;

    explicit Mlp(std::vector<int> dims) : dims_(std::move(dims))
    {
        if (dims_.size() < 2) {
            throw ValidationError("Mlp: need at least input and output dimensions");
        }
        std::size_t offset = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            if (dims_[l] < 1 || dims_[l + 1] < 1) {
                throw ValidationError("Mlp: layer dimensions must be positive");
            }
            weight_offset_.push_back(offset);
            offset += static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
            bias_offset_.push_back(offset);
            offset += static_cast<std::size_t>(dims_[l + 1]);
        }
        params_.assign(offset, 0.0);
    }

    /// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
    template <class Rng>
    void init_glorot(Rng& rng)
    {
        for (int l = 0; l < layers(); ++l) {
            const int in = dims_[static_cast<std::size_t>(l)];
            const int out = dims_[static_cast<std::size_t>(l) + 1];
            const double limit = std::sqrt(6.0 / (in + out));
            std::uniform_real_distribution<double> dist(-limit, limit);
            double* w = params_.data() + weight_offset_[static_cast<std::size_t>(l)];
            for (std::size_t k = 0; k < static_cast<std::size_t>(in) * out; ++k) {
                w[k] = dist(rng);
            }
            std::fill_n(params_.data() + bias_offset_[static_cast<std::size_t>(l)], out, 0.0);
        }
    }

    const std::vector<int>& dims() const { return dims_; }
    int layers() const { return static_cast<int>(dims_.size()) - 1; }
    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t weight_offset(int l) const { return weight_offset_[static_cast<std::size_t>(l)]; }
    std::size_t bias_offset(int l) const { return bias_offset_[static_cast<std::size_t>(l)]; }

    /// Per-layer activations of one forward pass; act[0] is the input,
    /// act[l] for hidden l is post-ReLU, act.back() is the raw output.
    struct Trace {
        std::vector<std::vector<double>> act;
    };

    void forward(std::span<const double> x, Trace& trace) const
    {
        check_input(x);
        trace.act.resize(dims_.size());
        trace.act[0].assign(x.begin(), x.end());
        for (int l = 0; l < layers(); ++l) {
            const auto& in = trace.act[static_cast<std::size_t>(l)];
            auto& out = trace.act[static_cast<std::size_t>(l) + 1];
            affine(l, in, out);
            if (l + 1 < layers()) {
                for (double& y : out) {
                    y = y > 0.0 ? y : 0.0;
                }
            }
        }
    }

    std::vector<double> forward(std::span<const double> x) const
    {
        Trace trace;
        forward(x, trace);
        return std::move(trace.act.back());
    }

    /// Accumulates dLoss/dparams into `grads` given dLoss/doutput.
    void backward(const Trace& trace, std::span<const double> d_out, std::span<double> grads) const
    {
        if (d_out.size() != static_cast<std::size_t>(output_dim()) || grads.size() != params_.size()) {
            throw ValidationError("Mlp::backward: dimension mismatch");
        }
        std::vector<double> delta(d_out.begin(), d_out.end());
        std::vector<double> prev;
        for (int l = layers() - 1; l >= 0; --l) {
            const int in = dims_[static_cast<std::size_t>(l)];
            const int out = dims_[static_cast<std::size_t>(l) + 1];
            const auto& a = trace.act[static_cast<std::size_t>(l)];
            const double* w = params_.data() + weight_offset_[static_cast<std::size_t>(l)];
            double* gw = grads.data() + weight_offset_[static_cast<std::size_t>(l)];
            double* gb = grads.data() + bias_offset_[static_cast<std::size_t>(l)];
            for (int o = 0; o < out; ++o) {
                gb[o] += delta[static_cast<std::size_t>(o)];
            }
            for (int i = 0; i < in; ++i) {
                const double ai = a[static_cast<std::size_t>(i)];
                if (ai == 0.0) {
                    continue;
                }
                double* row = gw + static_cast<std::size_t>(i) * out;
                for (int o = 0; o < out; ++o) {
                    row[o] += ai * delta[static_cast<std::size_t>(o)];
                }
            }
            if (l == 0) {
                break;
            }
            prev.assign(static_cast<std::size_t>(in), 0.0);
            for (int i = 0; i < in; ++i) {
                // ReLU derivative: hidden activations equal zero exactly where the unit is off.
                if (a[static_cast<std::size_t>(i)] <= 0.0) {
                    continue;
                }
                const double* row = w + static_cast<std::size_t>(i) * out;
                double s = 0.0;
                for (int o = 0; o < out; ++o) {
                    s += row[o] * delta[static_cast<std::size_t>(o)];
                }
                prev[static_cast<std::size_t>(i)] = s;
            }
            delta.swap(prev);
        }
    }

    /// Activations of a batch forward pass; act[l] holds rows x dims[l]
    /// values, row-major.
    struct BatchTrace {
        std::size_t rows = 0;
        std::vector<std::vector<double>> act;
        std::span<const double> output(std::size_t r) const
        {
            const auto width = act.back().size() / rows;
            return {act.back().data() + r * width, width};
        }
    };

    /// Forward pass over several inputs at once. Each weight row is reused
    /// across the whole batch while it is in cache.
    void forward_batch(std::span<const std::span<const double>> xs, BatchTrace& trace) const
    {
        const std::size_t rows = xs.size();
        trace.rows = rows;
        trace.act.resize(dims_.size());
        auto& a0 = trace.act[0];
        a0.resize(rows * static_cast<std::size_t>(input_dim()));
        for (std::size_t r = 0; r < rows; ++r) {
            check_input(xs[r]);
            std::copy(xs[r].begin(), xs[r].end(), a0.begin() + static_cast<std::ptrdiff_t>(r * input_dim()));
        }
        for (int l = 0; l < layers(); ++l) {
            const auto n_in = static_cast<std::size_t>(dims_[static_cast<std::size_t>(l)]);
            const auto n_out = static_cast<std::size_t>(dims_[static_cast<std::size_t>(l) + 1]);
            const double* w = params_.data() + weight_offset_[static_cast<std::size_t>(l)];
            const double* b = params_.data() + bias_offset_[static_cast<std::size_t>(l)];
            const auto& in = trace.act[static_cast<std::size_t>(l)];
            auto& out = trace.act[static_cast<std::size_t>(l) + 1];
            out.resize(rows * n_out);
            for (std::size_t r = 0; r < rows; ++r) {
                std::copy(b, b + n_out, out.begin() + static_cast<std::ptrdiff_t>(r * n_out));
            }
            for (std::size_t i = 0; i < n_in; ++i) {
                const double* __restrict row = w + i * n_out;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double xi = in[r * n_in + i];
                    if (xi == 0.0) {
                        continue;
                    }
                    double* __restrict y = out.data() + r * n_out;
                    for (std::size_t o = 0; o < n_out; ++o) {
                        y[o] += row[o] * xi;
                    }
                }
            }
            if (l + 1 < layers()) {
                for (double& y : out) {
                    y = y > 0.0 ? y : 0.0;
                }
            }
        }
    }

    /// Batch counterpart of backward(); d_out is rows x output_dim, row-major.
    void backward_batch(const BatchTrace& trace, std::span<const double> d_out, std::span<double> grads) const
    {
        const std::size_t rows = trace.rows;
        if (d_out.size() != rows * static_cast<std::size_t>(output_dim()) || grads.size() != params_.size()) {
            throw ValidationError("Mlp::backward_batch: dimension mismatch");
        }
        std::vector<double> delta(d_out.begin(), d_out.end());
        std::vector<double> prev;
        for (int l = layers() - 1; l >= 0; --l) {
            const auto n_in = static_cast<std::size_t>(dims_[static_cast<std::size_t>(l)]);
            const auto n_out = static_cast<std::size_t>(dims_[static_cast<std::size_t>(l) + 1]);
            const auto& a = trace.act[static_cast<std::size_t>(l)];
            const double* w = params_.data() + weight_offset_[static_cast<std::size_t>(l)];
            double* gw = grads.data() + weight_offset_[static_cast<std::size_t>(l)];
            double* gb = grads.data() + bias_offset_[static_cast<std::size_t>(l)];
            for (std::size_t r = 0; r < rows; ++r) {
                const double* d = delta.data() + r * n_out;
                for (std::size_t o = 0; o < n_out; ++o) {
                    gb[o] += d[o];
                }
            }
            for (std::size_t i = 0; i < n_in; ++i) {
                double* __restrict grow = gw + i * n_out;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double ai = a[r * n_in + i];
                    if (ai == 0.0) {
                        continue;
                    }
                    const double* __restrict d = delta.data() + r * n_out;
                    for (std::size_t o = 0; o < n_out; ++o) {
                        grow[o] += ai * d[o];
                    }
                }
            }
            if (l == 0) {
                break;
            }
            prev.assign(rows * n_in, 0.0);
            for (std::size_t i = 0; i < n_in; ++i) {
                const double* row = w + i * n_out;
                for (std::size_t r = 0; r < rows; ++r) {
                    if (a[r * n_in + i] <= 0.0) {
                        continue;
                    }
                    const double* d = delta.data() + r * n_out;
                    double s = 0.0;
                    for (std::size_t o = 0; o < n_out; ++o) {
                        s += row[o] * d[o];
                    }
                    prev[r * n_in + i] = s;
                }
            }
            delta.swap(prev);
        }
    }

private:
    void check_input(std::span<const double> x) const
    {
        if (x.size() != static_cast<std::size_t>(input_dim())) {
            throw ValidationError("Mlp::forward: expected input of length " + std::to_string(input_dim()) +
                                  ", got " + std::to_string(x.size()));
        }
    }

    void affine(int l, const std::vector<double>& in, std::vector<double>& out) const
    {
        const int n_in = dims_[static_cast<std::size_t>(l)];
        const int n_out = dims_[static_cast<std::size_t>(l) + 1];
        const double* w = params_.data() + weight_offset_[static_cast<std::size_t>(l)];
        const double* b = params_.data() + bias_offset_[static_cast<std::size_t>(l)];
        out.assign(b, b + n_out);
        for (int i = 0; i < n_in; ++i) {
            const double xi = in[static_cast<std::size_t>(i)];
            if (xi == 0.0) {
                continue;
            }
            const double* row = w + static_cast<std::size_t>(i) * n_out;
            for (int o = 0; o < n_out; ++o) {
                out[static_cast<std::size_t>(o)] += row[o] * xi;
            }
        }
    }

    std::vector<int> dims_;
    std::vector<std::size_t> weight_offset_;
    std::vector<std::size_t> bias_offset_;
    std::vector<double> params_;
};

/// Lowest index among the maxima.
inline int argmax(std::span<const double> values)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg)
{
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ValidationError("adam_step: shape mismatch");
    }
    for (std::size_t k = 0; k < grads.size(); ++k) {
        if (!std::isfinite(grads[k])) {
            throw InvariantViolation("adam_step: non-finite gradient " + std::to_string(grads[k]) +
                                     " at parameter " + std::to_string(k) + " (step " +
                                     std::to_string(state.t + 1) + ")");
        }
    }
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
        state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[k] / c1;
        const double v_hat = state.v[k] / c2;
        params[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

struct Experience {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

/// Fixed-capacity ring; sampling is uniform with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 5000) : capacity_(capacity)
    {
        if (capacity == 0) {
            throw ValidationError("ReplayBuffer: capacity must be > 0");
        }
        ring_.reserve(capacity);
    }

    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }

    void push(Experience e)
    {
        if (ring_.size() < capacity_) {
            ring_.push_back(std::move(e));
        } else {
            ring_[head_] = std::move(e);
            head_ = (head_ + 1) % capacity_;
        }
    }

    /// i-th oldest stored experience.
    const Experience& at(std::size_t i) const { return ring_[(head_ + i) % ring_.size()]; }

    template <class Rng>
    std::vector<const Experience*> sample(std::size_t batch, Rng& rng) const
    {
        if (ring_.empty()) {
            throw ValidationError("ReplayBuffer::sample: empty buffer");
        }
        std::uniform_int_distribution<std::size_t> pick(0, ring_.size() - 1);
        std::vector<const Experience*> out;
        out.reserve(batch);
        for (std::size_t k = 0; k < batch; ++k) {
            out.push_back(&ring_[pick(rng)]);
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0; // oldest element once the ring is full
    std::vector<Experience> ring_;
};

struct Hyperparams {
    double gamma = 0.9;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int target_sync_period = 500;
    int epochs = 4; // train steps per beam-switching interval
    int batch_size = 32;
    int replay_capacity = 5000;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    bool huber_loss = false;

    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }

    void validate() const
    {
        if (!(gamma >= 0.0 && gamma < 1.0)) {
            throw ConfigError("gamma must lie in [0, 1)");
        }
        if (!(learning_rate >= 0.0) || batch_size < 1 || replay_capacity < 1 || target_sync_period < 1 || epochs < 0) {
            throw ConfigError("learning hyperparameters out of range");
        }
        if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
            throw ConfigError("epsilon schedule endpoints must lie in [0, 1]");
        }
    }
};

/// Linear decay from `start` to `end` over `horizon` steps, constant after.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    long long horizon = 1;
};

inline double epsilon_at(long long step, const EpsilonSchedule& schedule)
{
    if (step < 0) {
        throw ValidationError("epsilon_at: negative step");
    }
    if (schedule.horizon <= 0 || step >= schedule.horizon) {
        return schedule.end;
    }
    const double frac = static_cast<double>(step) / static_cast<double>(schedule.horizon);
    return schedule.start + (schedule.end - schedule.start) * frac;
}

/// y_i = r_i + gamma * (1 - done_i) * Q_target(s'_i)[argmax_a Q_online(s'_i)[a]]
inline std::vector<double> ddqn_targets(std::span<const Experience* const> batch, const Mlp& online, const Mlp& target,
                                        double gamma)
{
    std::vector<double> y;
    y.reserve(batch.size());
    std::vector<std::span<const double>> next;
    std::vector<std::size_t> slot;
    for (const Experience* e : batch) {
        y.push_back(e->reward);
        if (!e->done && gamma != 0.0) {
            slot.push_back(y.size() - 1);
            next.emplace_back(e->next_state);
        }
    }
    if (next.empty()) {
        return y;
    }
    Mlp::BatchTrace on;
    Mlp::BatchTrace tg;
    online.forward_batch(next, on);
    target.forward_batch(next, tg);
    for (std::size_t k = 0; k < next.size(); ++k) {
        const int best = argmax(on.output(k));
        y[slot[k]] += gamma * tg.output(k)[static_cast<std::size_t>(best)];
    }
    return y;
}

/// Squared (or Huber) TD loss on one batch; one Adam step on the online net.
inline double train_on_batch(std::span<const Experience* const> batch, Mlp& online, const Mlp& target,
                             AdamState& opt, const Hyperparams& hp)
{
    if (batch.empty()) {
        throw ValidationError("train_on_batch: empty batch");
    }
    const auto y = ddqn_targets(batch, online, target, hp.gamma);
    const auto width = static_cast<std::size_t>(online.output_dim());
    std::vector<std::span<const double>> states;
    for (const Experience* e : batch) {
        if (e->action < 0 || e->action >= online.output_dim()) {
            throw ValidationError("train_on_batch: action out of range");
        }
        states.emplace_back(e->state);
    }
    Mlp::BatchTrace trace;
    online.forward_batch(states, trace);
    std::vector<double> d_out(batch.size() * width, 0.0);
    const double n = static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto a = static_cast<std::size_t>(batch[i]->action);
        const double err = trace.output(i)[a] - y[i];
        double grad;
        if (hp.huber_loss && std::abs(err) > 1.0) {
            loss += std::abs(err) - 0.5;
            grad = err > 0.0 ? 1.0 : -1.0;
        } else if (hp.huber_loss) {
            loss += 0.5 * err * err;
            grad = err;
        } else {
            loss += err * err;
            grad = 2.0 * err;
        }
        d_out[i * width + a] = grad / n;
    }
    std::vector<double> grads(online.param_count(), 0.0);
    online.backward_batch(trace, d_out, grads);
    adam_step(online.params(), grads, opt, hp.adam());
    return loss / n;
}

/// Online/target pair with its optimizer, replay memory and step counter.
struct DdqnLearner {
    Mlp online;
    Mlp target;
    AdamState optimizer;
    ReplayBuffer replay;
    Hyperparams hp;
    long long train_steps = 0;

    DdqnLearner(Mlp net, const Hyperparams& params)
        : online(std::move(net)), target(online), optimizer(online.param_count()),
          replay(static_cast<std::size_t>(params.replay_capacity)), hp(params)
    {
    }
};

/// Samples a batch, applies one update, and syncs the target net every
/// `target_sync_period` steps. No-op (nullopt) while the replay is smaller
/// than one batch.
template <class Rng>
std::optional<double> train_step(DdqnLearner& learner, Rng& rng)
{
    if (learner.replay.size() < static_cast<std::size_t>(learner.hp.batch_size)) {
        return std::nullopt;
    }
    const auto batch = learner.replay.sample(static_cast<std::size_t>(learner.hp.batch_size), rng);
    const double loss = train_on_batch(batch, learner.online, learner.target, learner.optimizer, learner.hp);
    ++learner.train_steps;
    if (learner.train_steps % learner.hp.target_sync_period == 0) {
        learner.target.params() = learner.online.params();
    }
    return loss;
}

// Checkpoint: a text header (one "key value" pair per line, terminated by
// "end_header") followed by every parameter as a little-endian IEEE-754
// 64-bit float, layer by layer, weights before biases.

inline constexpr const char* kCheckpointMagic = "mmbeam-qnet 1";

struct Checkpoint {
    Mlp net;
    Hyperparams hp;
    long long train_steps = 0;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t x)
{
    if constexpr (std::endian::native == std::endian::little) {
        return x;
    } else {
        std::uint64_t r = 0;
        for (int k = 0; k < 8; ++k) {
            r = (r << 8) | ((x >> (8 * k)) & 0xffU);
        }
        return r;
    }
}

inline std::string fmt_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

inline void write_checkpoint(std::ostream& out, const Mlp& net, const Hyperparams& hp, long long train_steps)
{
    out << kCheckpointMagic << '\n' << "layers";
    for (int d : net.dims()) {
        out << ' ' << d;
    }
    out << '\n'
        << "gamma " << detail::fmt_double(hp.gamma) << '\n'
        << "learning_rate " << detail::fmt_double(hp.learning_rate) << '\n'
        << "adam_beta1 " << detail::fmt_double(hp.adam_beta1) << '\n'
        << "adam_beta2 " << detail::fmt_double(hp.adam_beta2) << '\n'
        << "adam_epsilon " << detail::fmt_double(hp.adam_epsilon) << '\n'
        << "target_sync_period " << hp.target_sync_period << '\n'
        << "epochs " << hp.epochs << '\n'
        << "batch_size " << hp.batch_size << '\n'
        << "replay_capacity " << hp.replay_capacity << '\n'
        << "train_steps " << train_steps << '\n'
        << "params " << net.param_count() << '\n'
        << "end_header\n";
    for (double p : net.params()) {
        const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(p));
        out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
}

inline void save_checkpoint(const std::string& path, const Mlp& net, const Hyperparams& hp, long long train_steps)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path);
    }
    write_checkpoint(out, net, hp, train_steps);
}

inline Checkpoint read_checkpoint(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kCheckpointMagic) {
        throw ValidationError("checkpoint: bad magic line");
    }
    Checkpoint ck;
    std::vector<int> dims;
    std::size_t params = 0;
    bool have_params = false;
    while (std::getline(in, line) && line != "end_header") {
        std::istringstream kv(line);
        std::string key;
        kv >> key;
        if (key == "layers") {
            int d;
            while (kv >> d) {
                dims.push_back(d);
            }
        } else if (key == "gamma") {
            kv >> ck.hp.gamma;
        } else if (key == "learning_rate") {
            kv >> ck.hp.learning_rate;
        } else if (key == "adam_beta1") {
            kv >> ck.hp.adam_beta1;
        } else if (key == "adam_beta2") {
            kv >> ck.hp.adam_beta2;
        } else if (key == "adam_epsilon") {
            kv >> ck.hp.adam_epsilon;
        } else if (key == "target_sync_period") {
            kv >> ck.hp.target_sync_period;
        } else if (key == "epochs") {
            kv >> ck.hp.epochs;
        } else if (key == "batch_size") {
            kv >> ck.hp.batch_size;
        } else if (key == "replay_capacity") {
            kv >> ck.hp.replay_capacity;
        } else if (key == "train_steps") {
            kv >> ck.train_steps;
        } else if (key == "params") {
            kv >> params;
            have_params = true;
        }
        // Unknown header keys are ignored so newer writers stay readable.
    }
    if (line != "end_header" || dims.size() < 2 || !have_params) {
        throw ValidationError("checkpoint: incomplete header");
    }
    ck.net = Mlp(dims);
    if (ck.net.param_count() != params) {
        throw ValidationError("checkpoint: parameter count does not match layer dimensions");
    }
    for (double& p : ck.net.params()) {
        std::uint64_t bits = 0;
        if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
            throw ValidationError("checkpoint: truncated parameter block");
        }
        p = std::bit_cast<double>(detail::to_little_endian(bits));
    }
    return ck;
}

inline Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read checkpoint " + path);
    }
    return read_checkpoint(in);
}

} // namespace mmbeam
