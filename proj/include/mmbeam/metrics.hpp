#pragma once

// Run-level metrics: overall/effective throughput per MT, geometric-mean
// throughput, latency summaries and baseline-vs-candidate comparison.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmbeam/traffic.hpp"

namespace mmbeam {

struct GeometricMean {
    double value = 0.0;
    std::size_t excluded_zeros = 0;
};

/// exp(mean(log x)) over the non-zero entries; no data when all are zero.
inline std::optional<GeometricMean> geometric_mean(std::span<const double> values)
{
    double log_sum = 0.0;
    std::size_t used = 0;
    GeometricMean gm;
    for (double v : values) {
        if (v == 0.0) {
            ++gm.excluded_zeros;
            continue;
        }
        log_sum += std::log(v);
        ++used;
    }
    if (used == 0) {
        return std::nullopt;
    }
    gm.value = std::exp(log_sum / static_cast<double>(used));
    return gm;
}

/// Per-MT accounting accumulated over a run.
struct MtHistory {
    std::int64_t delivered_bytes = 0;
    long long scheduled_ttis = 0;
    std::optional<double> first_arrival; // seconds
};

struct Throughputs {
    double overall_bps = 0.0;
    std::optional<double> effective_bps; // no data when never scheduled
};

/// overall = bits / (run_end - first arrival); effective = bits / scheduled time.
inline Throughputs throughputs(const MtHistory& h, double run_end, double tti_s)
{
    Throughputs t;
    const double bits = static_cast<double>(h.delivered_bytes) * 8.0;
    if (h.first_arrival && run_end > *h.first_arrival) {
        t.overall_bps = bits / (run_end - *h.first_arrival);
    }
    if (h.scheduled_ttis > 0) {
        t.effective_bps = bits / (static_cast<double>(h.scheduled_ttis) * tti_s);
    }
    return t;
}

struct MtMetrics {
    int mt = 0;
    double overall_bps = 0.0;
    std::optional<double> effective_bps;
    std::optional<LatencyStats> latency;
    long long scheduled_ttis = 0;
    std::int64_t delivered_bytes = 0;
};

struct MetricsReport {
    std::vector<MtMetrics> per_mt;
    std::optional<GeometricMean> gm_overall_bps;
    std::optional<GeometricMean> gm_effective_bps;
    std::optional<LatencyStats> latency; // over every delivered packet
    std::vector<long long> coscheduled_counts; // index k = number of (sector, TTI) with k MTs, k >= 1
    std::vector<double> timeseries_t;      // seconds (end of each 1 s window)
    std::vector<double> timeseries_mbps;   // network-average MT throughput in the window
    std::vector<double> timeseries_epsilon;
};

/// Empirical CDF over k = 1..M_p of the co-scheduled count.
inline std::vector<double> coscheduled_cdf(std::span<const long long> counts)
{
    long long total = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        total += counts[k];
    }
    std::vector<double> cdf;
    long long running = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        running += counts[k];
        cdf.push_back(total > 0 ? static_cast<double>(running) / static_cast<double>(total) : 0.0);
    }
    return cdf;
}

struct Gains {
    std::optional<double> gm_overall_gain_pct;
    std::optional<double> gm_effective_gain_pct;
    std::optional<double> mean_latency_factor; // baseline / candidate
    std::optional<double> p95_latency_factor;
};

/// Summary figures of one run, as stored in summary.txt.
struct RunSummary {
    std::optional<double> gm_overall_mbps;
    std::optional<double> gm_effective_mbps;
    std::optional<double> mean_latency_ms;
    std::optional<double> p95_latency_ms;
};

inline RunSummary summarize(const MetricsReport& r)
{
    RunSummary s;
    if (r.gm_overall_bps) {
        s.gm_overall_mbps = r.gm_overall_bps->value / 1e6;
    }
    if (r.gm_effective_bps) {
        s.gm_effective_mbps = r.gm_effective_bps->value / 1e6;
    }
    if (r.latency) {
        s.mean_latency_ms = r.latency->mean * 1e3;
        s.p95_latency_ms = r.latency->p95 * 1e3;
    }
    return s;
}

inline Gains compare(const RunSummary& baseline, const RunSummary& candidate)
{
    auto gain = [](const std::optional<double>& b, const std::optional<double>& c) -> std::optional<double> {
        if (!b || !c || *b == 0.0) {
            return std::nullopt;
        }
        return (*c / *b - 1.0) * 100.0;
    };
    auto factor = [](const std::optional<double>& b, const std::optional<double>& c) -> std::optional<double> {
        if (!b || !c || *c == 0.0) {
            return std::nullopt;
        }
        return *b / *c;
    };
    Gains g;
    g.gm_overall_gain_pct = gain(baseline.gm_overall_mbps, candidate.gm_overall_mbps);
    g.gm_effective_gain_pct = gain(baseline.gm_effective_mbps, candidate.gm_effective_mbps);
    g.mean_latency_factor = factor(baseline.mean_latency_ms, candidate.mean_latency_ms);
    g.p95_latency_factor = factor(baseline.p95_latency_ms, candidate.p95_latency_ms);
    return g;
}

inline Gains compare(const MetricsReport& baseline, const MetricsReport& candidate)
{
    return compare(summarize(baseline), summarize(candidate));
}

} // namespace mmbeam
