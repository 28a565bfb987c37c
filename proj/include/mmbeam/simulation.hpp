#pragma once

// Experiment driver: TTI loop with beam-switching events, DDQN training,
// metric collection and the CSV / text outputs of a run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmbeam/codebook.hpp"
#include "mmbeam/config.hpp"
#include "mmbeam/ddqn.hpp"
#include "mmbeam/error.hpp"
#include "mmbeam/measurement.hpp"
#include "mmbeam/metrics.hpp"
#include "mmbeam/policy.hpp"
#include "mmbeam/scheduler.hpp"
#include "mmbeam/topology.hpp"
#include "mmbeam/traffic.hpp"

namespace mmbeam {

/// Optional streaming outputs; rows are written while the run progresses.
struct RunSinks {
    std::ostream* packet_log = nullptr; // mt_id,packet_id,arrival_s,completion_s,latency_ms
    std::ostream* states = nullptr;     // interval,mt_id,sector,action,epsilon,state...
    std::ostream* schedule = nullptr;   // tti,sector,mt_id,beam,rbs,sinr_db,bytes
};

struct TrainLogRow {
    long long interval = 0;
    long long train_steps = 0;
    double epsilon = 0.0;
    std::optional<double> mean_loss;
    double mean_reward = 0.0;
    std::size_t replay_size = 0;
};

struct InvariantCounters {
    ScheduleViolations schedule;
    long long rewards_out_of_range = 0;
    long long rewards_emitted = 0;
    std::int64_t generated_bytes = 0;
    std::int64_t delivered_bytes = 0;
    std::int64_t backlog_bytes = 0;
    std::int64_t scheduler_bytes = 0; // sum over scheduled entries

    bool conserved() const { return generated_bytes == delivered_bytes + backlog_bytes; }
    bool bytes_consistent() const { return scheduler_bytes == delivered_bytes; }
};

struct RunResult {
    MetricsReport report;
    InvariantCounters counters;
    std::vector<TrainLogRow> train_log;
    std::vector<long long> assignments_per_mt;
    std::optional<Mlp> qnet; // final online network (train/eval)
    Hyperparams hp;
    long long train_steps = 0;
    long long intervals = 0;
    long long transitions = 0; // closed into the replay memory
    double run_end = 0.0;
    CorrelationMatrix rho{1};
};

inline Hyperparams hyperparams_from(const SimConfig& c)
{
    Hyperparams hp;
    hp.gamma = c.gamma;
    hp.learning_rate = c.learning_rate;
    hp.adam_beta1 = c.adam_beta1;
    hp.adam_beta2 = c.adam_beta2;
    hp.adam_epsilon = c.adam_epsilon;
    hp.target_sync_period = c.target_sync_period;
    hp.epochs = c.epochs;
    hp.batch_size = c.batch_size;
    hp.replay_capacity = c.replay_size;
    hp.epsilon_start = c.epsilon_start;
    hp.epsilon_end = c.epsilon_end;
    hp.huber_loss = c.huber_loss;
    return hp;
}

inline NetworkLayout layout_from(const SimConfig& c)
{
    NetworkLayout layout = make_hex_layout(c.sites, c.inter_site_distance_m, c.panels_per_sector);
    layout.carrier_ghz = c.carrier_ghz;
    layout.bandwidth_hz = c.bandwidth_mhz * 1e6;
    layout.tx_power_dbm = c.tx_power_dbm;
    layout.noise_density_dbm_hz = c.noise_density_dbm_hz;
    layout.noise_figure_db = c.noise_figure_db;
    layout.bs_height = c.bs_height_m;
    layout.mt_height = c.mt_height_m;
    layout.downtilt_deg = c.downtilt_deg;
    layout.shadowing_std_db = c.shadowing_std_db;
    layout.validate();
    return layout;
}

inline std::vector<Codebook> codebooks_from(const SimConfig& c, const NetworkLayout& layout)
{
    PanelConfig base;
    base.elements_per_dim = c.elements_per_dim;
    base.element_spacing = c.element_spacing;
    base.element_gain_dbi = c.element_gain_dbi;
    base.front_to_back_db = c.front_to_back_db;
    std::vector<Codebook> books;
    for (int s = 0; s < layout.sector_count(); ++s) {
        const auto panels = sector_panels(layout, s, base);
        books.emplace_back(panels, c.beams_per_panel, GridShape{c.beams_azimuth, c.beams_elevation});
    }
    return books;
}

inline AngularGrid correlation_grid(const SimConfig& c)
{
    AngularGrid g;
    g.azimuth_step_deg = c.correlation_grid_deg;
    g.elevation_step_deg = c.correlation_grid_deg;
    return g;
}

/// Runs one experiment. `initial_net` seeds the Q-network in train/eval mode;
/// without it the network is Glorot-initialized from the seed.
inline RunResult run_experiment(const SimConfig& config, const std::optional<Mlp>& initial_net = std::nullopt,
                                const RunSinks& sinks = {})
{
    config.validate();
    const NetworkLayout layout = layout_from(config);
    const std::vector<Codebook> books = codebooks_from(config, layout);

    RunResult result;
    result.hp = hyperparams_from(config);
    result.hp.validate();
    // Sector panels only differ by a rotation, so one matrix serves all sectors.
    result.rho = compute_correlation(books.front(), correlation_grid(config));
    const CorrelationMatrix& rho = result.rho;

    const int mt_count = config.mt_count;
    const int sectors = layout.sector_count();
    const int beams = config.beams_per_sector();
    const int panels = config.panels_per_sector;
    const double tti = config.tti_s();
    const int per_interval = config.ttis_per_interval();
    const long long total_ttis = config.total_ttis();
    const bool learning = config.mode != RunMode::baseline;
    const bool training = config.mode == RunMode::train;

    LinkState links(layout, mt_count, config.seed);
    std::vector<MobileTerminal> mts = place_terminals(layout, mt_count, config.seed, books, links, config.mt_speed_kmh);

    // Per (mt, sector, beam) received power, refreshed every interval.
    std::vector<double> rx_dbm(static_cast<std::size_t>(mt_count) * sectors * beams);
    std::vector<double> rx_mw(rx_dbm.size());
    auto rx_index = [&](int mt, int s, int b) {
        return (static_cast<std::size_t>(mt) * sectors + static_cast<std::size_t>(s)) * beams +
               static_cast<std::size_t>(b);
    };
    auto refresh_rx = [&] {
        for (const MobileTerminal& mt : mts) {
            for (int s = 0; s < sectors; ++s) {
                for (const Beam& beam : books[static_cast<std::size_t>(s)].beams()) {
                    const std::size_t k = rx_index(mt.id, s, beam.global_index);
                    rx_dbm[k] = rx_power_dbm(mt, beam, s, layout, links);
                    rx_mw[k] = db_to_linear(rx_dbm[k]);
                }
            }
        }
    };
    refresh_rx();

    std::vector<std::vector<int>> sector_mts(static_cast<std::size_t>(sectors));
    for (const MobileTerminal& mt : mts) {
        sector_mts[static_cast<std::size_t>(mt.serving_sector)].push_back(mt.id);
    }

    SchedulerConfig sched;
    sched.correlation_threshold = config.correlation_threshold;
    sched.panels_per_sector = panels;
    sched.beams_per_panel = config.beams_per_panel;
    sched.total_rbs = config.total_rbs();
    sched.noise_psd_mw_per_hz = db_to_linear(config.noise_density_dbm_hz + config.noise_figure_db);
    sched.link = {config.rb_bandwidth_hz(), tti, config.se_cap};

    TrafficConfig traffic{config.traffic_rate_mbps * 1e6, config.packet_size_bytes};
    traffic.validate();
    std::vector<std::mt19937_64> traffic_rng;
    for (int mt = 0; mt < mt_count; ++mt) {
        traffic_rng.emplace_back(derive_seed(config.seed, 0x7aff1c, static_cast<std::uint64_t>(mt)));
    }
    std::int64_t next_packet_id = 0;

    std::vector<PacketBuffer> buffers(static_cast<std::size_t>(mt_count));
    std::vector<std::vector<PacketRecord>> completed(static_cast<std::size_t>(mt_count));
    std::vector<std::vector<float>> latencies_ms(static_cast<std::size_t>(mt_count));
    std::vector<MtHistory> history(static_cast<std::size_t>(mt_count));
    PfState pf(mt_count, config.pf_ema);
    std::vector<ActivationHistory> activation(static_cast<std::size_t>(sectors), ActivationHistory(beams, per_interval));

    std::vector<int> serving_beam(static_cast<std::size_t>(mt_count));
    std::vector<double> signal_mw(static_cast<std::size_t>(mt_count));
    std::vector<double> inter_mw(static_cast<std::size_t>(mt_count), 0.0);
    auto refresh_signal = [&] {
        for (const MobileTerminal& mt : mts) {
            signal_mw[static_cast<std::size_t>(mt.id)] = rx_mw[rx_index(mt.id, mt.serving_sector, mt.serving_beam)];
        }
    };

    // Learning state.
    std::mt19937_64 explore_rng(derive_seed(config.seed, 0xe7a1));
    std::mt19937_64 replay_rng(derive_seed(config.seed, 0x5a3b));
    std::optional<DdqnLearner> learner;
    std::optional<Mlp> frozen;
    if (learning) {
        Mlp net(config.net_layers);
        if (initial_net) {
            if (initial_net->dims() != config.net_layers) {
                throw ConfigError("net_layers: checkpoint dimensions do not match the configuration");
            }
            net = *initial_net;
        } else {
            std::mt19937_64 init_rng(derive_seed(config.seed, 0x1417));
            net.init_glorot(init_rng);
        }
        if (training) {
            learner.emplace(std::move(net), result.hp);
        } else {
            frozen = std::move(net);
        }
    }
    const Mlp* qnet = training ? &learner->online : (frozen ? &*frozen : nullptr);
    BaselinePolicy baseline_policy;
    std::optional<QNetworkPolicy> q_policy;
    if (qnet != nullptr) {
        q_policy.emplace(*qnet, explore_rng, training ? PolicyTag::rl_train : PolicyTag::rl_eval);
    }
    BeamPolicy& policy = q_policy ? static_cast<BeamPolicy&>(*q_policy) : baseline_policy;

    const long long total_intervals = config.total_intervals();
    EpsilonSchedule eps_schedule{config.epsilon_start, config.epsilon_end,
                                 std::max<long long>(1, std::llround(config.epsilon_decay_fraction *
                                                                     static_cast<double>(total_intervals) *
                                                                     config.epochs))};
    double epsilon = 0.0;

    std::vector<std::vector<DecisionRecord>> pending(static_cast<std::size_t>(sectors));
    std::vector<std::int64_t> interval_bytes(static_cast<std::size_t>(mt_count), 0);
    result.assignments_per_mt.assign(static_cast<std::size_t>(mt_count), 0);
    result.report.coscheduled_counts.assign(static_cast<std::size_t>(panels) + 1, 0);

    std::int64_t window_bytes = 0;
    double window_start = 0.0;
    long long interval = -1;

    auto close_interval = [&]() {
        // Rewards for the interval that just ended, then (in training) the
        // transitions that link its decisions to the new ones.
        std::vector<std::vector<RewardSample>> rewards(static_cast<std::size_t>(sectors));
        if (config.reward_scope == "network") {
            std::vector<int> ids;
            std::vector<std::int64_t> bytes;
            for (int mt = 0; mt < mt_count; ++mt) {
                ids.push_back(mt);
                bytes.push_back(interval_bytes[static_cast<std::size_t>(mt)]);
            }
            const auto all = compute_rewards(ids, bytes);
            for (const RewardSample& r : all) {
                rewards[static_cast<std::size_t>(mts[static_cast<std::size_t>(r.mt)].serving_sector)].push_back(r);
            }
        } else {
            for (int s = 0; s < sectors; ++s) {
                const auto& ids = sector_mts[static_cast<std::size_t>(s)];
                std::vector<std::int64_t> bytes;
                for (int mt : ids) {
                    bytes.push_back(interval_bytes[static_cast<std::size_t>(mt)]);
                }
                rewards[static_cast<std::size_t>(s)] = compute_rewards(ids, bytes);
            }
        }
        double reward_sum = 0.0;
        long long reward_n = 0;
        for (const auto& sector_rewards : rewards) {
            for (const RewardSample& r : sector_rewards) {
                ++result.counters.rewards_emitted;
                if (!(r.reward >= 0.0 && r.reward <= 1.0)) {
                    ++result.counters.rewards_out_of_range;
                }
                reward_sum += r.reward;
                ++reward_n;
            }
        }
        std::fill(interval_bytes.begin(), interval_bytes.end(), 0);
        return std::make_pair(std::move(rewards), reward_n > 0 ? reward_sum / reward_n : 0.0);
    };

    for (long long n = 0; n < total_ttis; ++n) {
        const double now = static_cast<double>(n + 1) * tti;

        if (n % per_interval == 0) {
            ++interval;
            if (n > 0) {
                const double dt = per_interval * tti;
                for (MobileTerminal& mt : mts) {
                    mt = step_mobility(mt, dt, layout.region);
                }
                links.update(layout, mts);
                refresh_rx();
            }
            std::vector<std::vector<RewardSample>> rewards;
            double mean_reward = 0.0;
            if (n > 0) {
                auto closed = close_interval();
                rewards = std::move(closed.first);
                mean_reward = closed.second;
            }
            epsilon = training ? epsilon_at(interval * config.epochs, eps_schedule) : 0.0;
            if (q_policy) {
                q_policy->set_epsilon(epsilon);
            }

            double loss_sum = 0.0;
            int loss_n = 0;
            for (int s = 0; s < sectors; ++s) {
                std::vector<int> order = sector_mts[static_cast<std::size_t>(s)];
                std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                    const double pa = pf.avg_throughput[static_cast<std::size_t>(a)];
                    const double pb = pf.avg_throughput[static_cast<std::size_t>(b)];
                    return pa != pb ? pa > pb : a < b;
                });
                std::vector<RsrpReport> reports;
                reports.reserve(order.size());
                for (int mt : order) {
                    std::vector<double> raw(static_cast<std::size_t>(beams));
                    for (int b = 0; b < beams; ++b) {
                        raw[static_cast<std::size_t>(b)] = rx_dbm[rx_index(mt, s, b)];
                    }
                    reports.push_back(make_report(mt, std::move(raw), n));
                }
                const std::vector<double> h = activation[static_cast<std::size_t>(s)].normalized();
                activation[static_cast<std::size_t>(s)].reset();
                SectorAssignment assignment = assign_interval(order, reports, h, rho, panels, policy);
                for (const DecisionRecord& d : assignment.decisions) {
                    mts[static_cast<std::size_t>(d.mt)].serving_beam = d.action;
                    serving_beam[static_cast<std::size_t>(d.mt)] = d.action;
                    ++result.assignments_per_mt[static_cast<std::size_t>(d.mt)];
                    if (sinks.states != nullptr) {
                        *sinks.states << interval << ',' << d.mt << ',' << s << ',' << d.action << ',' << epsilon;
                        char buf[32];
                        for (double x : d.state.flattened) {
                            std::snprintf(buf, sizeof buf, ",%.6g", x);
                            *sinks.states << buf;
                        }
                        *sinks.states << '\n';
                    }
                }
                if (training && n > 0) {
                    auto transitions = close_transitions(pending[static_cast<std::size_t>(s)],
                                                         rewards[static_cast<std::size_t>(s)], assignment.decisions,
                                                         false);
                    result.transitions += static_cast<long long>(transitions.size());
                    for (Experience& e : transitions) {
                        learner->replay.push(std::move(e));
                    }
                }
                pending[static_cast<std::size_t>(s)] = std::move(assignment.decisions);
            }
            if (training && n > 0) {
                for (int k = 0; k < config.epochs; ++k) {
                    if (const auto loss = train_step(*learner, replay_rng)) {
                        loss_sum += *loss;
                        ++loss_n;
                    }
                }
            }
            if (training) {
                TrainLogRow row;
                row.interval = interval;
                row.train_steps = learner->train_steps;
                row.epsilon = epsilon;
                if (loss_n > 0) {
                    row.mean_loss = loss_sum / loss_n;
                }
                row.mean_reward = mean_reward;
                row.replay_size = learner->replay.size();
                result.train_log.push_back(row);
            }
            refresh_signal();
        }

        for (int mt = 0; mt < mt_count; ++mt) {
            const auto arrivals = ftp3_arrivals(traffic, now - tti, tti, traffic_rng[static_cast<std::size_t>(mt)],
                                                next_packet_id);
            MtHistory& hist = history[static_cast<std::size_t>(mt)];
            for (const Packet& p : arrivals) {
                if (!hist.first_arrival) {
                    hist.first_arrival = p.arrival_time;
                }
                buffers[static_cast<std::size_t>(mt)].push(p);
            }
        }

        std::vector<SectorDecision> decisions;
        decisions.reserve(static_cast<std::size_t>(sectors));
        for (int s = 0; s < sectors; ++s) {
            SectorTtiInput in;
            in.tti = n;
            in.now = now;
            in.sector = s;
            in.mts = sector_mts[static_cast<std::size_t>(s)];
            in.serving_beam = serving_beam;
            in.signal_mw = signal_mw;
            in.inter_mw = inter_mw;
            decisions.push_back(run_tti(in, rho, sched, buffers, pf, activation[static_cast<std::size_t>(s)], completed));
            const SectorDecision& d = decisions.back();
            check_decision(d, rho, sched, result.counters.schedule);
            const std::size_t k = d.entries.size();
            if (k > 0) {
                if (k >= result.report.coscheduled_counts.size()) {
                    result.report.coscheduled_counts.resize(k + 1, 0);
                }
                ++result.report.coscheduled_counts[k];
            }
            for (const ScheduledEntry& e : d.entries) {
                MtHistory& hist = history[static_cast<std::size_t>(e.mt)];
                ++hist.scheduled_ttis;
                hist.delivered_bytes += e.bytes;
                interval_bytes[static_cast<std::size_t>(e.mt)] += e.bytes;
                result.counters.scheduler_bytes += e.bytes;
                window_bytes += e.bytes;
                if (sinks.schedule != nullptr) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf, "%lld,%d,%d,%d,%d,%.6g,%lld\n", n, s, e.mt, e.beam, e.rbs,
                                  e.sinr_db, static_cast<long long>(e.bytes));
                    *sinks.schedule << buf;
                }
            }
        }

        for (int mt = 0; mt < mt_count; ++mt) {
            auto& done = completed[static_cast<std::size_t>(mt)];
            for (const PacketRecord& r : done) {
                latencies_ms[static_cast<std::size_t>(mt)].push_back(static_cast<float>(r.latency * 1e3));
                if (sinks.packet_log != nullptr) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf, "%d,%lld,%.6g,%.6g,%.6g\n", mt, static_cast<long long>(r.id),
                                  r.arrival_time, r.completion_time, r.latency * 1e3);
                    *sinks.packet_log << buf;
                }
            }
            done.clear();
        }

        // Interference snapshot seen by the next TTI.
        for (const MobileTerminal& mt : mts) {
            double sum = 0.0;
            for (const SectorDecision& d : decisions) {
                if (d.sector == mt.serving_sector) {
                    continue;
                }
                for (const ScheduledEntry& e : d.entries) {
                    sum += rx_mw[rx_index(mt.id, d.sector, e.beam)] * e.rbs / sched.total_rbs;
                }
            }
            inter_mw[static_cast<std::size_t>(mt.id)] = sum;
        }

        const bool last = n + 1 == total_ttis;
        if (now - window_start >= 1.0 - 1e-9 || last) {
            const double span_s = now - window_start;
            result.report.timeseries_t.push_back(now);
            result.report.timeseries_mbps.push_back(
                mt_count > 0 ? static_cast<double>(window_bytes) * 8.0 / (span_s * mt_count) / 1e6 : 0.0);
            result.report.timeseries_epsilon.push_back(epsilon);
            window_bytes = 0;
            window_start = now;
        }
    }
    // The run end closes the last decisions as terminal transitions.
    if (total_ttis > 0) {
        auto closed = close_interval();
        if (training) {
            for (int s = 0; s < sectors; ++s) {
                auto transitions = close_transitions(pending[static_cast<std::size_t>(s)],
                                                     closed.first[static_cast<std::size_t>(s)], {}, true);
                result.transitions += static_cast<long long>(transitions.size());
                for (Experience& e : transitions) {
                    learner->replay.push(std::move(e));
                }
            }
        }
    }

    result.intervals = interval + 1;
    result.run_end = static_cast<double>(total_ttis) * tti;
    if (learner) {
        result.train_steps = learner->train_steps;
        result.qnet = learner->online;
    } else if (frozen) {
        result.qnet = std::move(frozen);
    }

    std::vector<double> overall;
    std::vector<double> effective;
    std::vector<float> all_latency;
    for (int mt = 0; mt < mt_count; ++mt) {
        const MtHistory& h = history[static_cast<std::size_t>(mt)];
        const Throughputs t = throughputs(h, result.run_end, tti);
        MtMetrics m;
        m.mt = mt;
        m.overall_bps = t.overall_bps;
        m.effective_bps = t.effective_bps;
        m.scheduled_ttis = h.scheduled_ttis;
        m.delivered_bytes = h.delivered_bytes;
        auto& lat = latencies_ms[static_cast<std::size_t>(mt)];
        all_latency.insert(all_latency.end(), lat.begin(), lat.end());
        if (auto stats = summarize_latencies(std::move(lat))) {
            // Stored in seconds like the packet records.
            stats->mean *= 1e-3;
            stats->p50 *= 1e-3;
            stats->p95 *= 1e-3;
            stats->p99 *= 1e-3;
            m.latency = stats;
        }
        overall.push_back(m.overall_bps);
        if (m.effective_bps) {
            effective.push_back(*m.effective_bps);
        }
        result.report.per_mt.push_back(m);

        const PacketBuffer& buf = buffers[static_cast<std::size_t>(mt)];
        result.counters.generated_bytes += buf.generated_bytes();
        result.counters.delivered_bytes += buf.delivered_bytes();
        result.counters.backlog_bytes += buf.backlog();
    }
    result.report.gm_overall_bps = geometric_mean(overall);
    result.report.gm_effective_bps = geometric_mean(effective);
    if (auto stats = summarize_latencies(std::move(all_latency))) {
        stats->mean *= 1e-3;
        stats->p50 *= 1e-3;
        stats->p95 *= 1e-3;
        stats->p99 *= 1e-3;
        result.report.latency = stats;
    }
    return result;
}

// ---------------------------------------------------------------- outputs

namespace detail {

inline std::string g6(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string g6(const std::optional<double>& x) { return x ? g6(*x) : std::string("nan"); }

inline std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

} // namespace detail

inline void write_per_mt_metrics(const MetricsReport& r, std::ostream& out)
{
    out << "mt_id,overall_mbps,effective_mbps,mean_latency_ms,p95_latency_ms,scheduled_ttis\n";
    for (const MtMetrics& m : r.per_mt) {
        std::optional<double> eff;
        if (m.effective_bps) {
            eff = *m.effective_bps / 1e6;
        }
        std::optional<double> mean;
        std::optional<double> p95;
        if (m.latency) {
            mean = m.latency->mean * 1e3;
            p95 = m.latency->p95 * 1e3;
        }
        out << m.mt << ',' << detail::g6(m.overall_bps / 1e6) << ',' << detail::g6(eff) << ',' << detail::g6(mean)
            << ',' << detail::g6(p95) << ',' << m.scheduled_ttis << '\n';
    }
}

/// Per-second network-average MT throughput and the exploration rate.
inline void emit_timeseries(const MetricsReport& r, std::ostream& out)
{
    out << "t_s,avg_mt_thpt_mbps,epsilon\n";
    for (std::size_t i = 0; i < r.timeseries_t.size(); ++i) {
        out << detail::g6(r.timeseries_t[i]) << ',' << detail::g6(r.timeseries_mbps[i]) << ','
            << detail::g6(r.timeseries_epsilon[i]) << '\n';
    }
}

inline void emit_timeseries(const MetricsReport& r, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    emit_timeseries(r, out);
}

inline void write_coscheduled_cdf(const MetricsReport& r, std::ostream& out)
{
    out << "k,cdf\n";
    const auto cdf = coscheduled_cdf(r.coscheduled_counts);
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        out << i + 1 << ',' << detail::g6(cdf[i]) << '\n';
    }
}

inline void write_train_log(std::span<const TrainLogRow> rows, std::ostream& out)
{
    out << "interval,train_steps,epsilon,mean_loss,mean_reward,replay_size\n";
    for (const TrainLogRow& row : rows) {
        out << row.interval << ',' << row.train_steps << ',' << detail::g6(row.epsilon) << ','
            << detail::g6(row.mean_loss) << ',' << detail::g6(row.mean_reward) << ',' << row.replay_size << '\n';
    }
}

/// key=value lines; read back by read_summary.
inline void write_summary(const SimConfig& config, const RunResult& res, std::ostream& out)
{
    const RunSummary s = summarize(res.report);
    const auto& c = res.counters;
    out << "mode=" << to_string(config.mode) << '\n';
    out << "seed=" << config.seed << '\n';
    out << "duration_s=" << detail::g6(config.duration_s) << '\n';
    out << "gm_overall_mbps=" << detail::g6(s.gm_overall_mbps) << '\n';
    out << "gm_effective_mbps=" << detail::g6(s.gm_effective_mbps) << '\n';
    out << "gm_excluded_zeros=" << (res.report.gm_overall_bps ? res.report.gm_overall_bps->excluded_zeros : 0) << '\n';
    out << "mean_latency_ms=" << detail::g6(s.mean_latency_ms) << '\n';
    out << "p95_latency_ms=" << detail::g6(s.p95_latency_ms) << '\n';
    if (res.report.latency) {
        out << "p50_latency_ms=" << detail::g6(res.report.latency->p50 * 1e3) << '\n';
        out << "p99_latency_ms=" << detail::g6(res.report.latency->p99 * 1e3) << '\n';
        out << "packets_delivered=" << res.report.latency->count << '\n';
    }
    out << "generated_bytes=" << c.generated_bytes << '\n';
    out << "delivered_bytes=" << c.delivered_bytes << '\n';
    out << "backlog_bytes=" << c.backlog_bytes << '\n';
    out << "conservation_ok=" << (c.conserved() && c.bytes_consistent() ? 1 : 0) << '\n';
    out << "violations_panel_reuse=" << c.schedule.panel_reuse << '\n';
    out << "violations_cap=" << c.schedule.cap_exceeded << '\n';
    out << "violations_threshold=" << c.schedule.threshold_exceeded << '\n';
    out << "rewards_emitted=" << c.rewards_emitted << '\n';
    out << "rewards_out_of_range=" << c.rewards_out_of_range << '\n';
    out << "intervals=" << res.intervals << '\n';
    out << "train_steps=" << res.train_steps << '\n';
    out << "transitions=" << res.transitions << '\n';
}

inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    return kv;
}

inline RunSummary read_summary(const std::filesystem::path& path)
{
    const auto kv = read_key_values(path);
    auto get = [&](const char* key) -> std::optional<double> {
        const auto it = kv.find(key);
        if (it == kv.end() || it->second == "nan") {
            return std::nullopt;
        }
        return std::stod(it->second);
    };
    RunSummary s;
    s.gm_overall_mbps = get("gm_overall_mbps");
    s.gm_effective_mbps = get("gm_effective_mbps");
    s.mean_latency_ms = get("mean_latency_ms");
    s.p95_latency_ms = get("p95_latency_ms");
    return s;
}

inline void write_gains(const RunSummary& baseline, const RunSummary& candidate, std::ostream& out)
{
    const Gains g = compare(baseline, candidate);
    out << "baseline_gm_overall_mbps=" << detail::g6(baseline.gm_overall_mbps) << '\n';
    out << "candidate_gm_overall_mbps=" << detail::g6(candidate.gm_overall_mbps) << '\n';
    out << "gm_overall_gain_pct=" << detail::g6(g.gm_overall_gain_pct) << '\n';
    out << "gm_effective_gain_pct=" << detail::g6(g.gm_effective_gain_pct) << '\n';
    out << "baseline_mean_latency_ms=" << detail::g6(baseline.mean_latency_ms) << '\n';
    out << "candidate_mean_latency_ms=" << detail::g6(candidate.mean_latency_ms) << '\n';
    out << "mean_latency_factor=" << detail::g6(g.mean_latency_factor) << '\n';
    out << "p95_latency_factor=" << detail::g6(g.p95_latency_factor) << '\n';
}

/// Runs an experiment with every output written to `dir`.
inline RunResult simulate_to_dir(const SimConfig& config, const std::optional<Mlp>& initial_net,
                                 const std::filesystem::path& dir)
{
    config.validate();
    std::filesystem::create_directories(dir);
    std::optional<std::ofstream> packet_log;
    std::optional<std::ofstream> states;
    std::optional<std::ofstream> schedule;
    RunSinks sinks;
    if (config.write_packet_log) {
        packet_log = detail::open_out(dir / "latency.csv");
        *packet_log << "mt_id,packet_id,arrival_s,completion_s,latency_ms\n";
        sinks.packet_log = &*packet_log;
    }
    if (config.debug_dumps) {
        states = detail::open_out(dir / "states.csv");
        *states << "interval,mt_id,sector,action,epsilon,state...\n";
        sinks.states = &*states;
        schedule = detail::open_out(dir / "schedule.csv");
        *schedule << "tti,sector,mt_id,beam,rbs,sinr_db,bytes\n";
        sinks.schedule = &*schedule;
    }
    RunResult res = run_experiment(config, initial_net, sinks);

    {
        auto out = detail::open_out(dir / "config.txt");
        out << write_config(config);
    }
    {
        auto out = detail::open_out(dir / "per_mt_metrics.csv");
        write_per_mt_metrics(res.report, out);
    }
    emit_timeseries(res.report, dir / "timeseries.csv");
    {
        auto out = detail::open_out(dir / "coscheduled_cdf.csv");
        write_coscheduled_cdf(res.report, out);
    }
    {
        auto out = detail::open_out(dir / "train.csv");
        write_train_log(res.train_log, out);
    }
    if (res.qnet) {
        save_checkpoint((dir / "qnet.ckpt").string(), *res.qnet, res.hp, res.train_steps);
    }
    if (config.debug_dumps) {
        res.rho.write_csv((dir / "rho.csv").string());
    }
    {
        auto out = detail::open_out(dir / "summary.txt");
        write_summary(config, res, out);
    }
    return res;
}

} // namespace mmbeam
