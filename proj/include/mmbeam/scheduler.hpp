#pragma once

// Per-TTI proportional-fair MU-MIMO scheduling for one sector: PF ranking,
// greedy correlation-threshold pairing under the one-beam-per-panel rule,
// equal RB split, SINR evaluation and capped-Shannon rate mapping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mmbeam/codebook.hpp"
#include "mmbeam/error.hpp"
#include "mmbeam/measurement.hpp"
#include "mmbeam/traffic.hpp"

namespace mmbeam {

inline constexpr double kPfRateFloor = 1e3; // bits/s

/// Exponential moving average of delivered rate per MT.
struct PfState {
    std::vector<double> avg_throughput; // bits/s, indexed by MT id
    double ema_constant = 0.01;

    PfState() = default;
    PfState(int mt_count, double ema) : avg_throughput(static_cast<std::size_t>(mt_count), 0.0), ema_constant(ema) {}

    void update(int mt, double rate_bps)
    {
        double& avg = avg_throughput[static_cast<std::size_t>(mt)];
        avg = (1.0 - ema_constant) * avg + ema_constant * rate_bps;
    }
};

inline double pf_priority(double inst_rate_bps, double avg_throughput_bps)
{
    return inst_rate_bps / std::max(kPfRateFloor, avg_throughput_bps);
}

inline double pf_priority(double inst_rate_bps, const PfState& pf, int mt)
{
    return pf_priority(inst_rate_bps, pf.avg_throughput[static_cast<std::size_t>(mt)]);
}

struct PairingCandidate {
    int mt = 0;
    int beam = 0; // sector-local
};

/// Greedy scan in priority order: admit an MT when its panel is still free
/// and its beam's correlation with every admitted beam is within the threshold.
inline std::vector<PairingCandidate> pair_mts(std::span<const PairingCandidate> ranked, const CorrelationMatrix& rho,
                                              double threshold, int panels_per_sector, int beams_per_panel)
{
    std::vector<PairingCandidate> admitted;
    std::vector<char> panel_used(static_cast<std::size_t>(panels_per_sector), 0);
    for (const PairingCandidate& cand : ranked) {
        if (static_cast<int>(admitted.size()) >= panels_per_sector) {
            break;
        }
        const int panel = cand.beam / beams_per_panel;
        if (panel_used[static_cast<std::size_t>(panel)]) {
            continue;
        }
        const bool compatible = std::all_of(admitted.begin(), admitted.end(), [&](const PairingCandidate& other) {
            return rho(cand.beam, other.beam) <= threshold;
        });
        if (!compatible) {
            continue;
        }
        panel_used[static_cast<std::size_t>(panel)] = 1;
        admitted.push_back(cand);
    }
    return admitted;
}

struct SinrResult {
    double signal = 0.0; // mW
    double intra_interference = 0.0;
    double inter_interference = 0.0;
    double noise = 0.0;
    double sinr_db = 0.0;
};

/// Intra-sector leakage from each co-scheduled beam is rho^2 times the
/// MT's own received power (equal per-panel powers).
inline SinrResult compute_sinr(double signal_mw, std::span<const double> co_scheduled_rho,
                               std::span<const double> inter_sector_mw, double noise_mw)
{
    SinrResult r;
    r.signal = signal_mw;
    for (double rho : co_scheduled_rho) {
        r.intra_interference += signal_mw * rho * rho;
    }
    for (double p : inter_sector_mw) {
        r.inter_interference += p;
    }
    r.noise = noise_mw;
    const double denom = r.intra_interference + r.inter_interference + r.noise;
    r.sinr_db = linear_to_db(r.signal / denom);
    return r;
}

struct LinkAdaptation {
    double rb_bandwidth_hz = 12.0 * 60e3;
    double tti_s = 0.25e-3;
    double se_cap = 7.8; // bits/s/Hz
};

inline double spectral_efficiency(double sinr_db, double se_cap)
{
    if (std::isnan(sinr_db)) {
        return 0.0;
    }
    const double lin = sinr_db == -std::numeric_limits<double>::infinity() ? 0.0 : db_to_linear(sinr_db);
    return std::min(std::log2(1.0 + lin), se_cap);
}

inline std::int64_t rate_bytes(double sinr_db, int rb_count, const LinkAdaptation& la = {})
{
    if (rb_count < 0) {
        throw ValidationError("rate_bytes: negative RB count");
    }
    const double bits = spectral_efficiency(sinr_db, la.se_cap) * la.rb_bandwidth_hz * rb_count * la.tti_s;
    return static_cast<std::int64_t>(std::floor(bits / 8.0));
}

struct SchedulerConfig {
    double correlation_threshold = 0.4;
    int panels_per_sector = 3;
    int beams_per_panel = 8;
    int total_rbs = 277;
    double noise_psd_mw_per_hz = 0.0; // N_0 * NF, linear
    LinkAdaptation link{};
};

struct ScheduledEntry {
    int mt = 0;
    int beam = 0;
    int rbs = 0;
    double sinr_db = 0.0;
    std::int64_t bytes = 0; // bytes actually drained from the MT's buffer
};

struct SectorDecision {
    long long tti = 0;
    int sector = 0;
    std::vector<ScheduledEntry> entries;
};

/// Everything run_tti reads about the sector's MTs. Spans indexed by MT id
/// cover all MTs of the network.
struct SectorTtiInput {
    long long tti = 0;
    double now = 0.0; // seconds, scheduling instant
    int sector = 0;
    std::span<const int> mts;          // MT ids attached to this sector
    std::span<const int> serving_beam; // by MT id
    std::span<const double> signal_mw; // full-band rx power on the serving beam, by MT id
    std::span<const double> inter_mw;  // full-band inter-sector interference snapshot, by MT id
};

/// Single-user full-band rate used for PF ranking.
inline double single_user_rate_bps(double signal_mw, double inter_mw, const SchedulerConfig& cfg)
{
    const double band = cfg.link.rb_bandwidth_hz * cfg.total_rbs;
    const double sinr = signal_mw / (inter_mw + cfg.noise_psd_mw_per_hz * band);
    return std::min(std::log2(1.0 + sinr), cfg.link.se_cap) * band;
}

/// One TTI of one sector. Drains the admitted MTs' buffers (completed
/// packets appended to `completed[mt]`), updates PF averages of every MT in
/// the sector and the sector's activation history.
inline SectorDecision run_tti(const SectorTtiInput& in, const CorrelationMatrix& rho, const SchedulerConfig& cfg,
                              std::span<PacketBuffer> buffers, PfState& pf, ActivationHistory& history,
                              std::span<std::vector<PacketRecord>> completed)
{
    SectorDecision decision;
    decision.tti = in.tti;
    decision.sector = in.sector;

    struct Ranked {
        double priority;
        int mt;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(in.mts.size());
    for (int mt : in.mts) {
        if (buffers[static_cast<std::size_t>(mt)].backlog() <= 0) {
            continue;
        }
        const double rate = single_user_rate_bps(in.signal_mw[static_cast<std::size_t>(mt)],
                                                 in.inter_mw[static_cast<std::size_t>(mt)], cfg);
        ranked.push_back({pf_priority(rate, pf, mt), mt});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.priority != b.priority ? a.priority > b.priority : a.mt < b.mt;
    });

    std::vector<PairingCandidate> candidates;
    candidates.reserve(ranked.size());
    for (const Ranked& r : ranked) {
        candidates.push_back({r.mt, in.serving_beam[static_cast<std::size_t>(r.mt)]});
    }
    const auto admitted =
        pair_mts(candidates, rho, cfg.correlation_threshold, cfg.panels_per_sector, cfg.beams_per_panel);

    std::vector<int> active_beams;
    std::vector<double> co_rho;
    const int k = static_cast<int>(admitted.size());
    for (int i = 0; i < k; ++i) {
        const PairingCandidate& me = admitted[static_cast<std::size_t>(i)];
        const int rbs = cfg.total_rbs / k + (i < cfg.total_rbs % k ? 1 : 0);
        const double share = static_cast<double>(rbs) / cfg.total_rbs;
        co_rho.clear();
        for (int j = 0; j < k; ++j) {
            if (j != i) {
                co_rho.push_back(rho(me.beam, admitted[static_cast<std::size_t>(j)].beam));
            }
        }
        const double signal = in.signal_mw[static_cast<std::size_t>(me.mt)] * share;
        const double inter = in.inter_mw[static_cast<std::size_t>(me.mt)] * share;
        const double noise = cfg.noise_psd_mw_per_hz * cfg.link.rb_bandwidth_hz * rbs;
        const SinrResult sinr = compute_sinr(signal, co_rho, std::span<const double>(&inter, 1), noise);
        const std::int64_t capacity = rate_bytes(sinr.sinr_db, rbs, cfg.link);
        const std::int64_t drained = buffers[static_cast<std::size_t>(me.mt)].drain(
            capacity, in.now, completed[static_cast<std::size_t>(me.mt)]);
        decision.entries.push_back({me.mt, me.beam, rbs, sinr.sinr_db, drained});
        active_beams.push_back(me.beam);
    }

    for (int mt : in.mts) {
        double rate = 0.0;
        for (const ScheduledEntry& e : decision.entries) {
            if (e.mt == mt) {
                rate = static_cast<double>(e.bytes) * 8.0 / cfg.link.tti_s;
            }
        }
        pf.update(mt, rate);
    }
    history.record(active_beams);
    return decision;
}

struct ScheduleViolations {
    long long panel_reuse = 0;        // two beams of one panel in a TTI
    long long cap_exceeded = 0;       // more than M_p co-scheduled MTs
    long long threshold_exceeded = 0; // an admitted pair above the correlation threshold

    long long total() const { return panel_reuse + cap_exceeded + threshold_exceeded; }
};

/// Re-checks a decision against the per-TTI scheduling invariants.
inline void check_decision(const SectorDecision& d, const CorrelationMatrix& rho, const SchedulerConfig& cfg,
                           ScheduleViolations& v)
{
    const auto n = d.entries.size();
    if (static_cast<int>(n) > cfg.panels_per_sector) {
        ++v.cap_exceeded;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const int bi = d.entries[i].beam;
            const int bj = d.entries[j].beam;
            if (bi / cfg.beams_per_panel == bj / cfg.beams_per_panel) {
                ++v.panel_reuse;
            }
            if (rho(bi, bj) > cfg.correlation_threshold) {
                ++v.threshold_exceeded;
            }
        }
    }
}

} // namespace mmbeam
