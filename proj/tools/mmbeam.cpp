// Command-line front end: run one simulation or compare two finished runs.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmbeam/mmbeam.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app{"Multi-panel mmWave beam management simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string checkpoint;
    bool debug_dumps = false;
    std::optional<double> duration;
    auto* simulate = app.add_subcommand("simulate", "Run one experiment");
    simulate->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--mode", mode, "train, eval or baseline")
        ->required()
        ->check(CLI::IsMember({"train", "eval", "baseline"}));
    simulate->add_option("--seed", seed, "Random seed")->required();
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--checkpoint", checkpoint, "Initial Q-network weights")->check(CLI::ExistingFile);
    simulate->add_option("--duration", duration, "Override duration_s");
    simulate->add_flag("--debug-dumps", debug_dumps, "Also write rho.csv, states.csv and schedule.csv");

    std::string baseline_dir;
    std::string candidate_dir;
    std::string compare_out;
    auto* cmp = app.add_subcommand("compare", "Compare a candidate run against a baseline run");
    cmp->add_option("--baseline", baseline_dir, "Baseline run directory")->required()->check(CLI::ExistingDirectory);
    cmp->add_option("--candidate", candidate_dir, "Candidate run directory")->required()->check(CLI::ExistingDirectory);
    cmp->add_option("--out", compare_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            mmbeam::SimConfig config = mmbeam::load_config(config_path);
            config.mode = mmbeam::parse_mode(mode);
            config.seed = seed;
            config.output_dir = out_dir;
            if (duration) {
                config.duration_s = *duration;
            }
            config.debug_dumps = config.debug_dumps || debug_dumps;
            config.validate();
            std::optional<mmbeam::Mlp> net;
            if (!checkpoint.empty()) {
                net = mmbeam::load_checkpoint(checkpoint).net;
            } else if (config.mode == mmbeam::RunMode::eval) {
                std::clog << "warning: eval without --checkpoint uses a randomly initialized network\n";
            }
            const auto res = mmbeam::simulate_to_dir(config, net, out_dir);
            const auto s = mmbeam::summarize(res.report);
            std::cout << "mode=" << mmbeam::to_string(config.mode) << " seed=" << seed
                      << " gm_overall_mbps=" << mmbeam::detail::g6(s.gm_overall_mbps)
                      << " mean_latency_ms=" << mmbeam::detail::g6(s.mean_latency_ms)
                      << " train_steps=" << res.train_steps << '\n';
            return 0;
        }
        const auto base = mmbeam::read_summary(fs::path(baseline_dir) / "summary.txt");
        const auto cand = mmbeam::read_summary(fs::path(candidate_dir) / "summary.txt");
        fs::create_directories(compare_out);
        std::ofstream out(fs::path(compare_out) / "summary.txt");
        mmbeam::write_gains(base, cand, out);
        mmbeam::write_gains(base, cand, std::cout);
        return out ? 0 : 1;
    } catch (const mmbeam::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
