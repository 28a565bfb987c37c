#pragma once

// Simulation configuration: a flat "key = value" text format. Every key of
// SimConfig must be spelled exactly; unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmbeam/error.hpp"

namespace mmbeam {

enum class RunMode { train, eval, baseline };

inline const char* to_string(RunMode m)
{
    switch (m) {
    case RunMode::train:
        return "train";
    case RunMode::eval:
        return "eval";
    case RunMode::baseline:
        return "baseline";
    }
    return "?";
}

inline RunMode parse_mode(const std::string& s)
{
    if (s == "train") {
        return RunMode::train;
    }
    if (s == "eval") {
        return RunMode::eval;
    }
    if (s == "baseline") {
        return RunMode::baseline;
    }
    throw ConfigError("mode: expected train, eval or baseline, got '" + s + "'");
}

struct SimConfig {
    // Deployment
    int sites = 1;
    double inter_site_distance_m = 200.0;
    int sectors_per_site = 3;
    int panels_per_sector = 3;  // M_p
    int beams_per_panel = 8;    // L_p
    int beams_azimuth = 4;
    int beams_elevation = 2;
    int elements_per_dim = 4;
    double element_spacing = 0.5;
    double element_gain_dbi = 5.0;
    double front_to_back_db = 30.0;
    double bs_height_m = 25.0;
    double mt_height_m = 1.5;
    double downtilt_deg = 12.0;
    double shadowing_std_db = 4.0;
    double correlation_grid_deg = 1.0;

    // Radio
    double carrier_ghz = 30.0;
    double bandwidth_mhz = 200.0;
    double scs_khz = 60.0;
    double tx_power_dbm = 40.0;
    double noise_figure_db = 3.0;
    double noise_density_dbm_hz = -174.0;
    double se_cap = 7.8;

    // Beam management and scheduling
    double beam_switch_interval_ms = 40.0;
    double correlation_threshold = 0.4;
    double pf_ema = 0.01;

    // Terminals and traffic
    int mt_count = 24;
    double mt_speed_kmh = 3.0;
    double traffic_rate_mbps = 21.0;
    int packet_size_bytes = 600;

    // Learning
    std::vector<int> net_layers{72, 128, 256, 24};
    int batch_size = 32;
    int replay_size = 5000;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int epochs = 4;
    double gamma = 0.9;
    int target_sync_period = 500;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.5;
    bool huber_loss = false;
    std::string reward_scope = "sector"; // sector | network

    // Run control
    std::uint64_t seed = 1;
    double duration_s = 60.0;
    RunMode mode = RunMode::baseline;
    std::string output_dir = "out";
    bool write_packet_log = true; // latency.csv
    bool debug_dumps = false;     // rho.csv, states.csv, schedule.csv

    int beams_per_sector() const { return panels_per_sector * beams_per_panel; }
    double tti_s() const { return 1e-3 * 15.0 / scs_khz; }
    double rb_bandwidth_hz() const { return 12.0 * scs_khz * 1e3; }
    int total_rbs() const { return static_cast<int>(std::floor(bandwidth_mhz * 1e6 / rb_bandwidth_hz() + 1e-9)); }
    int ttis_per_interval() const { return static_cast<int>(std::lround(beam_switch_interval_ms * 1e-3 / tti_s())); }
    long long total_ttis() const { return std::llround(duration_s / tti_s()); }
    long long total_intervals() const
    {
        const long long per = ttis_per_interval();
        return (total_ttis() + per - 1) / per;
    }

    void validate() const
    {
        std::vector<std::string> bad;
        auto need = [&](bool ok, const char* field) {
            if (!ok) {
                bad.emplace_back(field);
            }
        };
        need(sites == 1 || sites == 7, "sites");
        need(inter_site_distance_m > 0.0, "inter_site_distance_m");
        need(sectors_per_site == 3, "sectors_per_site");
        need(panels_per_sector >= 1, "panels_per_sector");
        need(beams_per_panel >= 1, "beams_per_panel");
        need(beams_azimuth >= 1 && beams_elevation >= 1 && beams_azimuth * beams_elevation == beams_per_panel,
             "beams_azimuth");
        need(elements_per_dim >= 1, "elements_per_dim");
        need(element_spacing > 0.0, "element_spacing");
        need(front_to_back_db >= 0.0, "front_to_back_db");
        need(bs_height_m > 0.0, "bs_height_m");
        need(mt_height_m > 0.0, "mt_height_m");
        need(shadowing_std_db >= 0.0, "shadowing_std_db");
        need(correlation_grid_deg > 0.0 && correlation_grid_deg <= 1.0, "correlation_grid_deg");
        need(carrier_ghz > 0.0, "carrier_ghz");
        need(bandwidth_mhz > 0.0, "bandwidth_mhz");
        need(scs_khz > 0.0, "scs_khz");
        need(se_cap > 0.0, "se_cap");
        need(beam_switch_interval_ms > 0.0, "beam_switch_interval_ms");
        need(correlation_threshold >= 0.0 && correlation_threshold <= 1.0, "correlation_threshold");
        need(pf_ema > 0.0 && pf_ema <= 1.0, "pf_ema");
        need(mt_count >= 0, "mt_count");
        need(mt_speed_kmh >= 0.0, "mt_speed_kmh");
        need(traffic_rate_mbps >= 0.0, "traffic_rate_mbps");
        need(packet_size_bytes > 0, "packet_size_bytes");
        need(net_layers.size() >= 2 && net_layers.front() == 3 * beams_per_sector() &&
                 net_layers.back() == beams_per_sector(),
             "net_layers");
        for (int d : net_layers) {
            need(d >= 1, "net_layers");
        }
        need(batch_size >= 1, "batch_size");
        need(replay_size >= 1, "replay_size");
        need(learning_rate >= 0.0, "learning_rate");
        need(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1");
        need(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2");
        need(adam_epsilon > 0.0, "adam_epsilon");
        need(epochs >= 0, "epochs");
        need(gamma >= 0.0 && gamma < 1.0, "gamma");
        need(target_sync_period >= 1, "target_sync_period");
        need(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon_start");
        need(epsilon_end >= 0.0 && epsilon_end <= 1.0, "epsilon_end");
        need(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0, "epsilon_decay_fraction");
        need(reward_scope == "sector" || reward_scope == "network", "reward_scope");
        need(duration_s > 0.0, "duration_s");
        need(total_rbs() >= 1, "bandwidth_mhz");
        need(ttis_per_interval() >= 1, "beam_switch_interval_ms");
        if (!bad.empty()) {
            std::string msg = "invalid configuration field(s):";
            for (const auto& f : bad) {
                msg += ' ' + f;
            }
            throw ConfigError(msg);
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value)
{
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !in.eof()) {
        throw ConfigError(key + ": cannot parse '" + value + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

inline std::string fmt(double x)
{
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

struct Field {
    std::function<void(SimConfig&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

template <class T>
Field number_field(T SimConfig::*member, const std::string& key)
{
    return {[member, key](SimConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); },
            [member](const SimConfig& c) {
                if constexpr (std::is_floating_point_v<T>) {
                    return fmt(c.*member);
                } else {
                    return std::to_string(c.*member);
                }
            }};
}

inline const std::map<std::string, Field>& config_fields()
{
    static const std::map<std::string, Field> fields = [] {
        std::map<std::string, Field> f;
#define MMBEAM_NUM(name) f[#name] = number_field(&SimConfig::name, #name)
        MMBEAM_NUM(sites);
        MMBEAM_NUM(inter_site_distance_m);
        MMBEAM_NUM(sectors_per_site);
        MMBEAM_NUM(panels_per_sector);
        MMBEAM_NUM(beams_per_panel);
        MMBEAM_NUM(beams_azimuth);
        MMBEAM_NUM(beams_elevation);
        MMBEAM_NUM(elements_per_dim);
        MMBEAM_NUM(element_spacing);
        MMBEAM_NUM(element_gain_dbi);
        MMBEAM_NUM(front_to_back_db);
        MMBEAM_NUM(bs_height_m);
        MMBEAM_NUM(mt_height_m);
        MMBEAM_NUM(downtilt_deg);
        MMBEAM_NUM(shadowing_std_db);
        MMBEAM_NUM(correlation_grid_deg);
        MMBEAM_NUM(carrier_ghz);
        MMBEAM_NUM(bandwidth_mhz);
        MMBEAM_NUM(scs_khz);
        MMBEAM_NUM(tx_power_dbm);
        MMBEAM_NUM(noise_figure_db);
        MMBEAM_NUM(noise_density_dbm_hz);
        MMBEAM_NUM(se_cap);
        MMBEAM_NUM(beam_switch_interval_ms);
        MMBEAM_NUM(correlation_threshold);
        MMBEAM_NUM(pf_ema);
        MMBEAM_NUM(mt_count);
        MMBEAM_NUM(mt_speed_kmh);
        MMBEAM_NUM(traffic_rate_mbps);
        MMBEAM_NUM(packet_size_bytes);
        MMBEAM_NUM(batch_size);
        MMBEAM_NUM(replay_size);
        MMBEAM_NUM(learning_rate);
        MMBEAM_NUM(adam_beta1);
        MMBEAM_NUM(adam_beta2);
        MMBEAM_NUM(adam_epsilon);
        MMBEAM_NUM(epochs);
        MMBEAM_NUM(gamma);
        MMBEAM_NUM(target_sync_period);
        MMBEAM_NUM(epsilon_start);
        MMBEAM_NUM(epsilon_end);
        MMBEAM_NUM(epsilon_decay_fraction);
        MMBEAM_NUM(seed);
        MMBEAM_NUM(duration_s);
#undef MMBEAM_NUM
        f["net_layers"] = {[](SimConfig& c, const std::string& v) {
                               c.net_layers.clear();
                               std::istringstream in(v);
                               std::string item;
                               while (std::getline(in, item, ',')) {
                                   c.net_layers.push_back(parse_number<int>("net_layers", trim(item)));
                               }
                           },
                           [](const SimConfig& c) {
                               std::string s;
                               for (std::size_t i = 0; i < c.net_layers.size(); ++i) {
                                   s += (i ? "," : "") + std::to_string(c.net_layers[i]);
                               }
                               return s;
                           }};
        f["huber_loss"] = {[](SimConfig& c, const std::string& v) { c.huber_loss = parse_bool("huber_loss", v); },
                           [](const SimConfig& c) { return std::string(c.huber_loss ? "true" : "false"); }};
        f["write_packet_log"] = {
            [](SimConfig& c, const std::string& v) { c.write_packet_log = parse_bool("write_packet_log", v); },
            [](const SimConfig& c) { return std::string(c.write_packet_log ? "true" : "false"); }};
        f["debug_dumps"] = {[](SimConfig& c, const std::string& v) { c.debug_dumps = parse_bool("debug_dumps", v); },
                            [](const SimConfig& c) { return std::string(c.debug_dumps ? "true" : "false"); }};
        f["reward_scope"] = {[](SimConfig& c, const std::string& v) { c.reward_scope = v; },
                             [](const SimConfig& c) { return c.reward_scope; }};
        f["mode"] = {[](SimConfig& c, const std::string& v) { c.mode = parse_mode(v); },
                     [](const SimConfig& c) { return std::string(to_string(c.mode)); }};
        f["output_dir"] = {[](SimConfig& c, const std::string& v) { c.output_dir = v; },
                           [](const SimConfig& c) { return c.output_dir; }};
        return f;
    }();
    return fields;
}

} // namespace detail

/// Sets one key; throws ConfigError for unknown keys or unparsable values.
inline void set_config_value(SimConfig& config, const std::string& key, const std::string& value)
{
    const auto& fields = detail::config_fields();
    const auto it = fields.find(key);
    if (it == fields.end()) {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
    it->second.set(config, value);
}

/// Parses "key = value" lines on top of the defaults. '#' starts a comment.
inline SimConfig parse_config(std::istream& in)
{
    SimConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        set_config_value(config, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return config;
}

inline SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    return parse_config(in);
}

/// Every key in canonical form; parse_config(write_config(c)) reproduces c.
inline std::string write_config(const SimConfig& config)
{
    std::string out;
    for (const auto& [key, field] : detail::config_fields()) {
        out += key + " = " + field.get(config) + "\n";
    }
    return out;
}

} // namespace mmbeam
