#include <random>

#include <gtest/gtest.h>

#include "mmbeam/scheduler.hpp"

using namespace mmbeam;

TEST(Pf, Priority)
{
    EXPECT_DOUBLE_EQ(pf_priority(10e6, 5e6), 2.0);
    EXPECT_DOUBLE_EQ(pf_priority(10e6, 0.0), 10e6 / kPfRateFloor);
    EXPECT_GT(pf_priority(5e6, 1e6), pf_priority(5e6, 2e6));
    PfState pf(2, 0.01);
    pf.update(0, 1e6);
    EXPECT_DOUBLE_EQ(pf.avg_throughput[0], 1e4);
    EXPECT_DOUBLE_EQ(pf_priority(1e6, pf, 0), 100.0);
}

namespace {

// Two panels of two beams; beams 0/2 correlate at 0.5, 0/3 at 0.39.
CorrelationMatrix small_rho()
{
    CorrelationMatrix rho(4);
    rho.set(0, 2, 0.5);
    rho.set(0, 3, 0.39);
    rho.set(1, 2, 0.1);
    rho.set(1, 3, 0.1);
    rho.set(0, 1, 0.2);
    rho.set(2, 3, 0.2);
    return rho;
}

} // namespace

TEST(Pairing, SingleMt)
{
    const auto rho = small_rho();
    const std::vector<PairingCandidate> ranked{{5, 1}};
    const auto out = pair_mts(ranked, rho, 0.4, 2, 2);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].mt, 5);
}

TEST(Pairing, SamePanelKeepsHigherPriority)
{
    const auto rho = small_rho();
    const std::vector<PairingCandidate> ranked{{7, 1}, {3, 0}};
    const auto out = pair_mts(ranked, rho, 0.4, 2, 2);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].mt, 7);
}

TEST(Pairing, ThresholdBoundary)
{
    const auto rho = small_rho();
    const std::vector<PairingCandidate> rejected{{0, 0}, {1, 2}};
    EXPECT_EQ(pair_mts(rejected, rho, 0.4, 2, 2).size(), 1u);
    const std::vector<PairingCandidate> admitted{{0, 0}, {1, 3}};
    EXPECT_EQ(pair_mts(admitted, rho, 0.4, 2, 2).size(), 2u);
}

TEST(Pairing, CapAtPanelCount)
{
    CorrelationMatrix rho(6);
    const std::vector<PairingCandidate> ranked{{0, 0}, {1, 2}, {2, 4}, {3, 1}};
    EXPECT_EQ(pair_mts(ranked, rho, 0.4, 3, 2).size(), 3u);
}

TEST(Sinr, NoInterferenceIsSnr)
{
    const auto r = compute_sinr(1e-6, {}, {}, 1e-9);
    EXPECT_DOUBLE_EQ(r.sinr_db, linear_to_db(1e3));
}

TEST(Sinr, ZeroCorrelationContributesNothing)
{
    const std::vector<double> co{0.0};
    const auto r = compute_sinr(1e-6, co, {}, 1e-9);
    EXPECT_EQ(r.intra_interference, 0.0);
    EXPECT_DOUBLE_EQ(r.sinr_db, linear_to_db(1e3));
}

TEST(Sinr, EqualPowerInterfererAtPointFour)
{
    const std::vector<double> co{0.4};
    const auto r = compute_sinr(1.0, co, {}, 1e-12);
    EXPECT_NEAR(r.sinr_db, 7.9588, 1e-3);
}

TEST(Rate, Bytes)
{
    EXPECT_EQ(rate_bytes(0.0, 1), 22);
    EXPECT_EQ(rate_bytes(-std::numeric_limits<double>::infinity(), 10), 0);
    const std::int64_t cap = rate_bytes(100.0, 10);
    EXPECT_EQ(cap, static_cast<std::int64_t>(std::floor(7.8 * 720e3 * 10 * 0.25e-3 / 8.0)));
    EXPECT_EQ(rate_bytes(60.0, 10), cap);
    EXPECT_THROW(rate_bytes(0.0, -1), ValidationError);
}

namespace {

struct Fixture {
    int mts = 4;
    CorrelationMatrix rho{6};
    SchedulerConfig cfg;
    std::vector<PacketBuffer> buffers;
    PfState pf;
    ActivationHistory history{6, 160};
    std::vector<std::vector<PacketRecord>> completed;
    std::vector<int> ids{0, 1, 2, 3};
    std::vector<int> beams{0, 2, 4, 1};
    std::vector<double> signal{1e-6, 2e-6, 1e-7, 5e-7};
    std::vector<double> inter{0.0, 0.0, 0.0, 0.0};

    Fixture()
    {
        cfg.panels_per_sector = 3;
        cfg.beams_per_panel = 2;
        cfg.total_rbs = 277;
        cfg.noise_psd_mw_per_hz = db_to_linear(-171.0);
        buffers.resize(4);
        pf = PfState(4, 0.01);
        completed.resize(4);
    }

    SectorDecision run(long long tti)
    {
        SectorTtiInput in;
        in.tti = tti;
        in.now = (tti + 1) * 0.25e-3;
        in.mts = ids;
        in.serving_beam = beams;
        in.signal_mw = signal;
        in.inter_mw = inter;
        return run_tti(in, rho, cfg, buffers, pf, history, completed);
    }
};

} // namespace

TEST(RunTti, NothingBacklogged)
{
    Fixture f;
    const auto d = f.run(0);
    EXPECT_TRUE(d.entries.empty());
    EXPECT_EQ(f.history.total(), 0);
}

TEST(RunTti, SingleBackloggedMtGetsAllRbs)
{
    Fixture f;
    f.buffers[2].push({0, 0.0, 100000});
    const auto d = f.run(0);
    ASSERT_EQ(d.entries.size(), 1u);
    EXPECT_EQ(d.entries[0].mt, 2);
    EXPECT_EQ(d.entries[0].rbs, 277);
    EXPECT_EQ(f.history.count(4), 1);
    EXPECT_GT(d.entries[0].bytes, 0);
    EXPECT_EQ(f.buffers[2].backlog(), 100000 - d.entries[0].bytes);
}

TEST(RunTti, LongRunInvariants)
{
    Fixture f;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int b = 0; b < 6; ++b) {
        for (int j = b + 1; j < 6; ++j) {
            f.rho.set(b, j, u(rng) * 0.6);
        }
    }
    const TrafficConfig traffic{60e6, 600};
    std::int64_t id = 0;
    ScheduleViolations v;
    std::vector<long long> hist(4, 0);
    std::int64_t scheduled = 0;
    for (long long t = 0; t < 20000; ++t) {
        if (t % 160 == 0) {
            f.history.reset();
            for (int& b : f.beams) {
                b = static_cast<int>(u(rng) * 6);
            }
        }
        for (int mt = 0; mt < 4; ++mt) {
            for (const auto& p : ftp3_arrivals(traffic, t * 0.25e-3, 0.25e-3, rng, id)) {
                f.buffers[mt].push(p);
            }
        }
        const auto d = f.run(t);
        check_decision(d, f.rho, f.cfg, v);
        ++hist[d.entries.size()];
        int rbs = 0;
        for (const auto& e : d.entries) {
            rbs += e.rbs;
            scheduled += e.bytes;
        }
        if (!d.entries.empty()) {
            EXPECT_EQ(rbs, 277);
        }
    }
    EXPECT_EQ(v.total(), 0);
    EXPECT_GT(hist[2] + hist[3], 0);
    std::int64_t delivered = 0;
    for (const auto& b : f.buffers) {
        delivered += b.delivered_bytes();
        EXPECT_EQ(b.generated_bytes(), b.delivered_bytes() + b.backlog());
    }
    EXPECT_EQ(delivered, scheduled);
}

TEST(RunTti, CheckDecisionFlagsViolations)
{
    CorrelationMatrix rho(4);
    rho.set(0, 2, 0.9);
    SchedulerConfig cfg;
    cfg.panels_per_sector = 2;
    cfg.beams_per_panel = 2;
    SectorDecision d;
    d.entries = {{0, 0, 1, 0, 0}, {1, 1, 1, 0, 0}, {2, 2, 1, 0, 0}};
    ScheduleViolations v;
    check_decision(d, rho, cfg, v);
    EXPECT_EQ(v.cap_exceeded, 1);
    EXPECT_EQ(v.panel_reuse, 1);
    EXPECT_EQ(v.threshold_exceeded, 1);
}
