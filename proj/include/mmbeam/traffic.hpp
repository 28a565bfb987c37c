#pragma once

// FTP3 traffic: Poisson arrivals of fixed-size packets, FIFO transmit buffers
// drained byte-wise by the scheduler, and per-packet latency records.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mmbeam/error.hpp"

namespace mmbeam {

struct TrafficConfig {
    double offered_load_bps = 21e6;
    int packet_size_bytes = 600;

    /// Packets per second.
    double arrival_rate() const { return offered_load_bps / (8.0 * packet_size_bytes); }

    void validate() const
    {
        if (!(offered_load_bps >= 0.0)) {
            throw ConfigError("traffic: offered_load must be >= 0");
        }
        if (packet_size_bytes <= 0) {
            throw ConfigError("traffic: packet_size must be > 0");
        }
    }
};

struct Packet {
    std::int64_t id = 0;
    double arrival_time = 0.0; // seconds
    std::int64_t size_bytes = 0;
};

struct PacketRecord {
    std::int64_t id = 0;
    double arrival_time = 0.0;
    double completion_time = 0.0;
    double latency = 0.0; // seconds
};

/// Arrivals in (start, start + dt], sorted by time. Packet ids continue from `next_id`.
template <class Rng>
std::vector<Packet> ftp3_arrivals(const TrafficConfig& config, double start, double dt, Rng& rng,
                                  std::int64_t& next_id)
{
    if (!(dt > 0.0)) {
        throw ValidationError("ftp3_arrivals: dt must be > 0");
    }
    std::vector<Packet> packets;
    const double mean = config.arrival_rate() * dt;
    if (mean <= 0.0) {
        return packets;
    }
    std::poisson_distribution<int> count_dist(mean);
    const int count = count_dist(rng);
    if (count == 0) {
        return packets;
    }
    std::uniform_real_distribution<double> offset(0.0, 1.0);
    std::vector<double> times(static_cast<std::size_t>(count));
    for (double& t : times) {
        t = start + dt * (1.0 - offset(rng));
    }
    std::sort(times.begin(), times.end());
    packets.reserve(times.size());
    for (double t : times) {
        packets.push_back({next_id++, t, config.packet_size_bytes});
    }
    return packets;
}

class PacketBuffer {
public:
    struct Entry {
        std::int64_t id;
        double arrival_time;
        std::int64_t remaining_bytes;
    };

    void push(const Packet& packet)
    {
        if (!queue_.empty() && packet.arrival_time < queue_.back().arrival_time) {
            throw ValidationError("PacketBuffer: arrivals must be non-decreasing");
        }
        queue_.push_back({packet.id, packet.arrival_time, packet.size_bytes});
        backlog_ += packet.size_bytes;
        generated_ += packet.size_bytes;
    }

    std::int64_t backlog() const { return backlog_; }
    std::int64_t generated_bytes() const { return generated_; }
    std::int64_t delivered_bytes() const { return delivered_; }
    bool empty() const { return queue_.empty(); }
    std::size_t packets() const { return queue_.size(); }
    const std::deque<Entry>& queue() const { return queue_; }

    /// FIFO byte drain; completed packets are appended to `completed`.
    /// Returns the number of bytes actually removed.
    std::int64_t drain(std::int64_t bytes, double now, std::vector<PacketRecord>& completed)
    {
        if (bytes < 0) {
            throw ValidationError("PacketBuffer::drain: negative byte budget");
        }
        std::int64_t budget = std::min(bytes, backlog_);
        const std::int64_t removed = budget;
        while (budget > 0) {
            Entry& head = queue_.front();
            const std::int64_t take = std::min(budget, head.remaining_bytes);
            head.remaining_bytes -= take;
            budget -= take;
            if (head.remaining_bytes == 0) {
                completed.push_back({head.id, head.arrival_time, now, now - head.arrival_time});
                queue_.pop_front();
            }
        }
        backlog_ -= removed;
        delivered_ += removed;
        return removed;
    }

private:
    std::deque<Entry> queue_;
    std::int64_t backlog_ = 0;
    std::int64_t generated_ = 0;
    std::int64_t delivered_ = 0;
};

struct DrainResult {
    std::vector<PacketRecord> delivered;
    PacketBuffer buffer;
};

inline DrainResult drain(PacketBuffer buffer, std::int64_t bytes, double now)
{
    DrainResult result;
    buffer.drain(bytes, now, result.delivered);
    result.buffer = std::move(buffer);
    return result;
}

struct LatencyStats {
    double mean = 0.0; // seconds
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
    std::size_t count = 0;
};

/// Nearest-rank percentile (p in (0, 100]) of an ascending-sorted sample.
template <class T>
T nearest_rank(std::span<const T> sorted, double p)
{
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

/// Empty input yields no data.
template <class T>
std::optional<LatencyStats> summarize_latencies(std::vector<T> values)
{
    if (values.empty()) {
        return std::nullopt;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (T v : values) {
        sum += static_cast<double>(v);
    }
    std::span<const T> sorted(values);
    LatencyStats s;
    s.count = values.size();
    s.mean = sum / static_cast<double>(values.size());
    s.p50 = static_cast<double>(nearest_rank(sorted, 50.0));
    s.p95 = static_cast<double>(nearest_rank(sorted, 95.0));
    s.p99 = static_cast<double>(nearest_rank(sorted, 99.0));
    return s;
}

inline std::optional<LatencyStats> latency_stats(std::span<const PacketRecord> records)
{
    std::vector<double> values;
    values.reserve(records.size());
    for (const PacketRecord& r : records) {
        values.push_back(r.latency);
    }
    return summarize_latencies(std::move(values));
}

} // namespace mmbeam
