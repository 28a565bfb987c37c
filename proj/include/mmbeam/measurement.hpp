#pragma once

// Beam sweep reports, activation history and assembly of the agent state
// s = [z, h, c] (normalized RSRP, activation frequency, cumulative
// cross-correlation with beams already handed out this pass).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mmbeam/codebook.hpp"
#include "mmbeam/error.hpp"

namespace mmbeam {

inline constexpr double kRsrpMinDbm = -140.0;
inline constexpr double kRsrpMaxDbm = -44.0;

inline double normalize_rsrp(double raw_dbm)
{
    return (std::clamp(raw_dbm, kRsrpMinDbm, kRsrpMaxDbm) - kRsrpMinDbm) / (kRsrpMaxDbm - kRsrpMinDbm);
}

inline std::vector<double> clip_and_normalize(std::span<const double> raw_dbm)
{
    std::vector<double> out;
    out.reserve(raw_dbm.size());
    for (std::size_t b = 0; b < raw_dbm.size(); ++b) {
        if (!std::isfinite(raw_dbm[b])) {
            throw ValidationError("clip_and_normalize: non-finite RSRP at beam " + std::to_string(b));
        }
        out.push_back(normalize_rsrp(raw_dbm[b]));
    }
    return out;
}

struct RsrpReport {
    int mt = 0;
    std::vector<double> raw;        // dBm per beam of the serving sector
    std::vector<double> normalized; // [0, 1] per beam
    long long timestamp = 0;        // TTI index of the sweep
};

inline RsrpReport make_report(int mt, std::vector<double> raw_dbm, long long tti)
{
    RsrpReport report;
    report.mt = mt;
    report.normalized = clip_and_normalize(raw_dbm);
    report.raw = std::move(raw_dbm);
    report.timestamp = tti;
    return report;
}

/// Per-sector count of TTIs each beam was scheduled in during one interval.
class ActivationHistory {
public:
    ActivationHistory() = default;
    ActivationHistory(int beams, int ttis_per_interval)
        : counts_(static_cast<std::size_t>(beams), 0), ttis_per_interval_(ttis_per_interval)
    {
        if (ttis_per_interval < 1) {
            throw ValidationError("ActivationHistory: ttis_per_interval must be >= 1");
        }
    }

    int size() const { return static_cast<int>(counts_.size()); }
    int ttis_per_interval() const { return ttis_per_interval_; }
    int count(int b) const { return counts_[static_cast<std::size_t>(b)]; }
    const std::vector<int>& counts() const { return counts_; }

    long long total() const
    {
        long long sum = 0;
        for (int c : counts_) {
            sum += c;
        }
        return sum;
    }

    /// One call per TTI with the beams that carried data in it.
    void record(std::span<const int> scheduled_beams)
    {
        for (int b : scheduled_beams) {
            if (b < 0 || b >= size()) {
                throw ValidationError("ActivationHistory: beam " + std::to_string(b) + " out of range");
            }
            if (counts_[static_cast<std::size_t>(b)] >= ttis_per_interval_) {
                throw InvariantViolation("ActivationHistory: beam " + std::to_string(b) +
                                         " activated more often than there are TTIs in the interval");
            }
            ++counts_[static_cast<std::size_t>(b)];
        }
    }

    std::vector<double> normalized() const
    {
        std::vector<double> h(counts_.size());
        for (std::size_t b = 0; b < counts_.size(); ++b) {
            h[b] = static_cast<double>(counts_[b]) / ttis_per_interval_;
        }
        return h;
    }

    void reset() { std::fill(counts_.begin(), counts_.end(), 0); }

private:
    std::vector<int> counts_;
    int ttis_per_interval_ = 1;
};

inline ActivationHistory record_activation(ActivationHistory history, std::span<const int> scheduled_beams)
{
    history.record(scheduled_beams);
    return history;
}

/// c[b] = sum_{j in assigned} rho[b][j] / (M_p - 1), clipped to [0, 1];
/// the zero vector when nothing has been assigned yet.
inline std::vector<double> cumulative_crosscorr(std::span<const int> assigned, const CorrelationMatrix& rho,
                                                int panels_per_sector)
{
    const int beams = rho.size();
    std::vector<double> c(static_cast<std::size_t>(beams), 0.0);
    if (assigned.empty()) {
        return c;
    }
    if (static_cast<int>(assigned.size()) > panels_per_sector - 1) {
        throw ValidationError("cumulative_crosscorr: more than M_p - 1 assigned beams");
    }
    for (std::size_t i = 0; i < assigned.size(); ++i) {
        if (assigned[i] < 0 || assigned[i] >= beams) {
            throw ValidationError("cumulative_crosscorr: beam index out of range");
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (assigned[k] == assigned[i]) {
                throw ValidationError("cumulative_crosscorr: duplicate assigned beam " + std::to_string(assigned[i]));
            }
        }
    }
    const double norm = 1.0 / (panels_per_sector - 1);
    for (int b = 0; b < beams; ++b) {
        double sum = 0.0;
        for (int j : assigned) {
            sum += rho(b, j);
        }
        c[static_cast<std::size_t>(b)] = std::clamp(sum * norm, 0.0, 1.0);
    }
    return c;
}

struct AgentState {
    std::vector<double> z;
    std::vector<double> h;
    std::vector<double> c;
    std::vector<double> flattened; // concat(z, h, c)

    int beams() const { return static_cast<int>(z.size()); }
};

inline AgentState assemble_state(std::vector<double> z, std::vector<double> h, std::vector<double> c)
{
    if (z.size() != h.size() || z.size() != c.size()) {
        throw ValidationError("assemble_state: z, h and c lengths differ (" + std::to_string(z.size()) + ", " +
                              std::to_string(h.size()) + ", " + std::to_string(c.size()) + ")");
    }
    AgentState state;
    state.flattened.reserve(3 * z.size());
    for (const auto* block : {&z, &h, &c}) {
        for (double x : *block) {
            if (!(x >= 0.0 && x <= 1.0)) {
                throw ValidationError("assemble_state: component outside [0, 1]");
            }
        }
        state.flattened.insert(state.flattened.end(), block->begin(), block->end());
    }
    state.z = std::move(z);
    state.h = std::move(h);
    state.c = std::move(c);
    return state;
}

} // namespace mmbeam
