#pragma once

// Beam assignment at each beam-switching boundary: legacy max-RSRP selection
// or epsilon-greedy selection over Q-values, with MTs visited in priority
// order so each MT sees the correlation with beams already handed out.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmbeam/codebook.hpp"
#include "mmbeam/ddqn.hpp"
#include "mmbeam/error.hpp"
#include "mmbeam/measurement.hpp"

namespace mmbeam {

enum class PolicyTag { baseline, rl_train, rl_eval };

inline const char* to_string(PolicyTag tag)
{
    switch (tag) {
    case PolicyTag::baseline:
        return "baseline";
    case PolicyTag::rl_train:
        return "rl_train";
    case PolicyTag::rl_eval:
        return "rl_eval";
    }
    return "?";
}

/// Argmax of the raw RSRP, lowest index on ties.
inline int baseline_select(const RsrpReport& report)
{
    if (report.raw.empty()) {
        throw ValidationError("baseline_select: empty report");
    }
    return argmax(report.raw);
}

/// Epsilon-greedy over Q(state); exploration is uniform over all beams.
template <class Rng>
int rl_select(const AgentState& state, const Mlp& qnet, double epsilon, Rng& rng)
{
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ValidationError("rl_select: epsilon outside [0, 1]");
    }
    if (qnet.output_dim() != state.beams()) {
        throw ValidationError("rl_select: Q-network output does not match the beam count");
    }
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(rng) < epsilon) {
            std::uniform_int_distribution<int> pick(0, qnet.output_dim() - 1);
            return pick(rng);
        }
    }
    return argmax(qnet.forward(state.flattened));
}

class BeamPolicy {
public:
    virtual ~BeamPolicy() = default;
    virtual int select(const AgentState& state, const RsrpReport& report) = 0;
    virtual PolicyTag tag() const = 0;
};

class BaselinePolicy final : public BeamPolicy {
public:
    int select(const AgentState&, const RsrpReport& report) override { return baseline_select(report); }
    PolicyTag tag() const override { return PolicyTag::baseline; }
};

class QNetworkPolicy final : public BeamPolicy {
public:
    QNetworkPolicy(const Mlp& qnet, std::mt19937_64& rng, PolicyTag tag)
        : qnet_(&qnet), rng_(&rng), tag_(tag)
    {
    }

    void set_epsilon(double epsilon) { epsilon_ = epsilon; }
    double epsilon() const { return epsilon_; }

    int select(const AgentState& state, const RsrpReport&) override
    {
        return rl_select(state, *qnet_, epsilon_, *rng_);
    }
    PolicyTag tag() const override { return tag_; }

private:
    const Mlp* qnet_;
    std::mt19937_64* rng_;
    PolicyTag tag_;
    double epsilon_ = 0.0;
};

struct DecisionRecord {
    int mt = 0;
    AgentState state;
    int action = 0;
};

struct SectorAssignment {
    std::vector<DecisionRecord> decisions; // in assignment order
};

/// Visits MTs in the given priority order. Each MT's correlation feature is
/// built from the distinct beams handed to higher-priority MTs of the same
/// pass, keeping the M_p - 1 most recent.
inline SectorAssignment assign_interval(std::span<const int> mts_in_priority_order, std::span<const RsrpReport> reports,
                                        const std::vector<double>& history, const CorrelationMatrix& rho,
                                        int panels_per_sector, BeamPolicy& policy)
{
    if (reports.size() != mts_in_priority_order.size()) {
        throw ValidationError("assign_interval: one report per MT is required");
    }
    SectorAssignment out;
    out.decisions.reserve(mts_in_priority_order.size());
    std::vector<int> recent; // distinct, oldest first
    const auto keep = static_cast<std::size_t>(std::max(panels_per_sector - 1, 0));
    for (std::size_t i = 0; i < mts_in_priority_order.size(); ++i) {
        const RsrpReport& report = reports[i];
        if (report.mt != mts_in_priority_order[i]) {
            throw ValidationError("assign_interval: report order does not match MT order");
        }
        auto c = cumulative_crosscorr(recent, rho, panels_per_sector);
        AgentState state = assemble_state(report.normalized, history, std::move(c));
        const int beam = policy.select(state, report);
        if (beam < 0 || beam >= rho.size()) {
            throw InvariantViolation("assign_interval: policy returned beam " + std::to_string(beam));
        }
        out.decisions.push_back({report.mt, std::move(state), beam});
        if (keep > 0) {
            std::erase(recent, beam);
            recent.push_back(beam);
            if (recent.size() > keep) {
                recent.erase(recent.begin());
            }
        }
    }
    return out;
}

struct RewardSample {
    int mt = 0;
    std::int64_t delivered_bytes = 0;
    double reward = 0.0;
};

/// r_k = B_k / max_j B_j over the pool; all zero when nobody received data.
inline std::vector<RewardSample> compute_rewards(std::span<const int> mts, std::span<const std::int64_t> delivered)
{
    if (mts.size() != delivered.size()) {
        throw ValidationError("compute_rewards: size mismatch");
    }
    std::int64_t peak = 0;
    for (std::int64_t b : delivered) {
        if (b < 0) {
            throw ValidationError("compute_rewards: negative byte count");
        }
        peak = std::max(peak, b);
    }
    std::vector<RewardSample> out;
    out.reserve(mts.size());
    for (std::size_t k = 0; k < mts.size(); ++k) {
        const double r = peak > 0 ? static_cast<double>(delivered[k]) / static_cast<double>(peak) : 0.0;
        out.push_back({mts[k], delivered[k], r});
    }
    return out;
}

/// Pairs each logged (state, action) with its reward and the MT's next
/// state. All three inputs are matched by MT id.
inline std::vector<Experience> close_transitions(std::span<const DecisionRecord> previous,
                                                 std::span<const RewardSample> rewards,
                                                 std::span<const DecisionRecord> next, bool done)
{
    std::vector<Experience> out;
    out.reserve(previous.size());
    for (const DecisionRecord& d : previous) {
        const auto r = std::find_if(rewards.begin(), rewards.end(), [&](const RewardSample& s) { return s.mt == d.mt; });
        if (r == rewards.end()) {
            throw ValidationError("close_transitions: no reward for MT " + std::to_string(d.mt));
        }
        const DecisionRecord* succ = nullptr;
        for (const DecisionRecord& n : next) {
            if (n.mt == d.mt) {
                succ = &n;
                break;
            }
        }
        if (succ == nullptr && !done) {
            throw ValidationError("close_transitions: no next state for MT " + std::to_string(d.mt));
        }
        Experience e;
        e.state = d.state.flattened;
        e.action = d.action;
        e.reward = r->reward;
        e.next_state = succ ? succ->state.flattened : d.state.flattened;
        e.done = done;
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace mmbeam
