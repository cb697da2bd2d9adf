#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "mcsim/baselines.hpp"
#include "mcsim/scenario.hpp"
#include "mcsim/selector.hpp"
#include "mcsim/sim.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace mcsim;
using namespace mcsim::testing;

namespace {

// One 120 kHz cell, a boxed-in UE, deterministic channel. The link curve
// midpoint offset moves the whole scenario between error-free and dead.
ScenarioConfig tiny_scenario(double snr50_mcs1_db, double duration_s = 2.0) {
    ScenarioConfig cfg = ScenarioConfig::defaults();
    cfg.gnbs.clear();
    GnbProfile g = make_profile(0, 3, CarrierClass::Small, {500.0, 500.0});
    cfg.gnbs.push_back(g);
    cfg.mobility.region = Rect{499.5, 499.5, 500.5, 500.5};
    cfg.channel.per_slot_fading = false;
    cfg.channel.shadow_sigma_small_db = 0.0;
    cfg.background.step_rbs = 0;
    cfg.background.occupied_min = 0;
    cfg.background.occupied_max = 0;
    cfg.selection.chl = 4;
    // One 1500-byte packet per 120 kHz slot.
    cfg.qos.rate_req_bps = 96e6;
    cfg.traffic.offered_bps = 0.0;
    cfg.link.snr50_mcs1_db = snr50_mcs1_db;
    cfg.sim.duration_s = duration_s;
    return cfg;
}

// Emits one fixed assignment forever; lets two "different" policies drive
// the engine identically.
class FixedAssignmentPolicy final : public Policy {
public:
    FixedAssignmentPolicy(std::string name, ClusterAssignment assignment)
        : name_(std::move(name)), assignment_(std::move(assignment)) {}

    std::string name() const override { return name_; }
    ClusterAssignment decide(std::span<const GnbSnapshot>, const DecisionContext&,
                             std::vector<ScoreCard>*) const override {
        return assignment_;
    }

private:
    std::string name_;
    ClusterAssignment assignment_;
};

bool metrics_equal(const RunMetrics& a, const RunMetrics& b) {
    auto va = metric_values(a);
    auto vb = metric_values(b);
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].second != vb[i].second) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("harq_step state machine") {
    HarqProcess p;
    p = harq_step(p, true);
    CHECK(p.resolved);
    CHECK(p.delivered);
    CHECK(p.attempts == 1);
    CHECK(p.decode_latency_s(Numerology(0)) == doctest::Approx(2e-3));

    HarqProcess q;
    for (int i = 0; i < 4; ++i) {
        CHECK_FALSE(q.resolved);
        q = harq_step(q, false);
    }
    CHECK(q.resolved);
    CHECK_FALSE(q.delivered);
    CHECK_THROWS_AS(harq_step(q, true), std::logic_error);

    HarqProcess r;
    r = harq_step(r, false);
    r = harq_step(r, false);
    r = harq_step(r, false);
    r = harq_step(r, true);
    CHECK(r.delivered);
    CHECK(r.attempts == 4);
    CHECK(r.decode_latency_s(Numerology(3)) == doctest::Approx(1e-3));
}

TEST_CASE("residual loss after the HARQ cycle") {
    CHECK(residual_loss(0.0) == 0.0);
    CHECK(residual_loss(1.0) == 1.0);
    CHECK(residual_loss(0.1) == doctest::Approx(1e-4));
    CHECK_THROWS_AS(residual_loss(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(residual_loss(1.1), std::invalid_argument);

    // Monte Carlo cross-check: four independent attempts.
    Random rng(12345);
    for (double bler : {0.05, 0.1, 0.3}) {
        const int trials = 2000000;
        int lost = 0;
        for (int i = 0; i < trials; ++i) {
            bool failed_all = true;
            for (int a = 0; a < 4 && failed_all; ++a) {
                if (!rng.bernoulli(bler)) failed_all = false;
            }
            if (failed_all) ++lost;
        }
        double expected = residual_loss(bler);
        double sigma = std::sqrt(expected * (1.0 - expected) / trials);
        CHECK(std::abs(static_cast<double>(lost) / trials - expected) <= 3.0 * sigma);
    }
}

TEST_CASE("background load walk") {
    BackgroundConfig cfg;
    cfg.step_rbs = 5;
    cfg.occupied_min = 0;
    cfg.occupied_max = 40;

    Random rng(9);
    BackgroundLoad load(4, cfg, rng);
    for (int i = 0; i < 100000; ++i) {
        load.step(rng);
        for (int g = 0; g < 4; ++g) {
            CHECK(load.occupied(g) >= 0);
            CHECK(load.occupied(g) <= 40);
        }
    }

    BackgroundConfig frozen = cfg;
    frozen.step_rbs = 0;
    Random rng2(9);
    BackgroundLoad still(4, frozen, rng2);
    std::vector<int> initial;
    for (int g = 0; g < 4; ++g) initial.push_back(still.occupied(g));
    for (int i = 0; i < 1000; ++i) still.step(rng2);
    for (int g = 0; g < 4; ++g) CHECK(still.occupied(g) == initial[g]);

    // Identical seeds give identical trajectories.
    Random ra(77), rb(77);
    BackgroundLoad la(3, cfg, ra), lb(3, cfg, rb);
    for (int i = 0; i < 1000; ++i) {
        la.step(ra);
        lb.step(rb);
        for (int g = 0; g < 3; ++g) CHECK(la.occupied(g) == lb.occupied(g));
    }
}

TEST_CASE("metric collection weighting") {
    QosRequirement req;
    req.rate_req_bps = 1e6;
    req.rel_req = 0.99;
    req.lat_req_s = 5e-3;

    SUBCASE("single member mean") {
        MetricsTallies t;
        t.duration_s = 10.0;
        t.offered_bits = 1.1e7;
        t.delivered_bits = 1.05e7;
        t.packets_delivered = 875;
        MemberTally m;
        m.delivered_bits = 1.05e7;
        m.packets_delivered = 875;
        m.latency_sum_s = 875 * 3e-3;
        t.per_member[0] = m;
        RunMetrics out = collect_metrics(t, req);
        CHECK(out.avg_latency_s == doctest::Approx(3e-3));
        CHECK(out.avg_rate_bps == doctest::Approx(1.05e6));
        CHECK(out.qos_rate_score == doctest::Approx(1.0));
        CHECK(out.qos_lat_score == doctest::Approx(1.0));
        CHECK(out.qos_rel_score == doctest::Approx(1.0));
    }

    SUBCASE("rate-weighted latency over two members") {
        MetricsTallies t;
        t.duration_s = 1.0;
        t.offered_bits = 3e6;
        t.delivered_bits = 3e6;
        t.packets_delivered = 300;
        MemberTally a;
        a.delivered_bits = 2e6;  // rate 2r
        a.packets_delivered = 200;
        a.latency_sum_s = 200 * 3e-3;
        MemberTally b;
        b.delivered_bits = 1e6;  // rate r
        b.packets_delivered = 100;
        b.latency_sum_s = 100 * 6e-3;
        t.per_member[0] = a;
        t.per_member[1] = b;
        RunMetrics out = collect_metrics(t, req);
        CHECK(out.avg_latency_s == doctest::Approx(4e-3));  // (2*3 + 1*6) / 3
    }

    SUBCASE("nothing delivered") {
        MetricsTallies t;
        t.duration_s = 1.0;
        t.offered_bits = 1e6;
        t.lost_bits = 1e6;
        t.packets_lost = 100;
        RunMetrics out = collect_metrics(t, req);
        CHECK(out.reliability == 0.0);
        CHECK(out.qos_lat_score == 0.0);
        CHECK(out.qos_rate_score == 0.0);
    }

    SUBCASE("spectrum efficiency from the resource integral") {
        MetricsTallies t;
        t.duration_s = 2.0;
        t.offered_bits = 2e6;
        t.delivered_bits = 2e6;
        t.packets_delivered = 10;
        MemberTally m;
        m.delivered_bits = 2e6;
        m.packets_delivered = 10;
        m.latency_sum_s = 10 * 1e-3;
        t.per_member[0] = m;
        t.resource_hz_integral = 2.0 * 500e3;
        RunMetrics out = collect_metrics(t, req);
        CHECK(out.resource_hz == doctest::Approx(500e3));
        CHECK(out.se_bps_per_hz == doctest::Approx(1e6 / 500e3));
    }
}

TEST_CASE("aggregation over repetitions") {
    RunMetrics a, b;
    a.avg_rate_bps = 1.0;
    b.avg_rate_bps = 3.0;
    std::vector<RunMetrics> runs{a, b};
    auto summary = aggregate_repetitions(runs);
    CHECK(summary.at("avg_rate_bps").mean == doctest::Approx(2.0));
    CHECK(summary.at("avg_rate_bps").stddev == doctest::Approx(std::sqrt(2.0)));

    std::vector<RunMetrics> same{a, a, a};
    summary = aggregate_repetitions(same);
    CHECK(summary.at("avg_rate_bps").mean == doctest::Approx(1.0));
    CHECK(summary.at("avg_rate_bps").stddev == doctest::Approx(0.0));

    std::vector<RunMetrics> one{b};
    summary = aggregate_repetitions(one);
    CHECK(summary.at("avg_rate_bps").stddev == 0.0);

    CHECK_THROWS_AS(aggregate_repetitions({}), std::invalid_argument);
}

TEST_CASE("error-free run delivers the offered rate at the latency floor") {
    ScenarioConfig cfg = tiny_scenario(-1000.0);
    CqiLinkBlerSource source(cfg.link.to_params(), cfg.channel);
    McsTable table = cfg.mcs_table();
    QosSelector policy(&source, {4, false, cfg.selection.epoch_s}, &table);

    EngineCounters counters;
    EngineOptions opts;
    opts.counters = &counters;
    opts.check_conservation = true;
    RunMetrics m = run_scenario(cfg, policy, 5, opts);

    CHECK(m.avg_rate_bps == doctest::Approx(96e6).epsilon(0.01));
    CHECK(m.reliability == 1.0);
    CHECK(m.avg_latency_s == doctest::Approx(min_latency_s(Numerology(3))));
    CHECK(counters.min_packet_latency_s == doctest::Approx(min_latency_s(Numerology(3))));
    CHECK(counters.max_packet_latency_s == doctest::Approx(min_latency_s(Numerology(3))));
    CHECK(m.qos_rate_score == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(m.qos_rel_score == doctest::Approx(1.0));
    CHECK(m.qos_lat_score == doctest::Approx(1.0));
    CHECK(counters.epochs_rate_met == counters.epochs);
}

TEST_CASE("dead channel loses everything") {
    ScenarioConfig cfg = tiny_scenario(1000.0, 1.0);
    CqiLinkBlerSource source(cfg.link.to_params(), cfg.channel);
    McsTable table = cfg.mcs_table();
    QosSelector policy(&source, {4, false, cfg.selection.epoch_s}, &table);

    EngineOptions opts;
    opts.check_conservation = true;
    RunMetrics m = run_scenario(cfg, policy, 5, opts);
    CHECK(m.avg_rate_bps == 0.0);
    CHECK(m.reliability == 0.0);
    CHECK(m.qos_rate_score == 0.0);
    CHECK(m.qos_rel_score == 0.0);
    CHECK(m.qos_lat_score == 0.0);
}

TEST_CASE("transport block latency stays inside the HARQ bracket") {
    // Lowered cell power puts the true SNR mid-curve: plenty of
    // retransmissions, none beyond the cap.
    ScenarioConfig cfg = tiny_scenario(0.0, 4.0);
    cfg.gnbs[0].max_power_dbm = -15.0;  // true SNR ~11.9 dB
    cfg.qos.rate_req_bps = 48e6;
    CqiLinkBlerSource source(cfg.link.to_params(), cfg.channel);
    McsTable table = cfg.mcs_table();
    QosSelector policy(&source, {4, false, cfg.selection.epoch_s}, &table);

    EngineCounters counters;
    EngineOptions opts;
    opts.counters = &counters;
    opts.check_conservation = true;
    RunMetrics m = run_scenario(cfg, policy, 11, opts);

    CHECK(m.reliability > 0.0);
    CHECK(counters.min_tb_latency_s >= min_latency_s(Numerology(3)) - 1e-12);
    CHECK(counters.max_tb_latency_s <= max_latency_s(Numerology(3)) + 1e-12);
    CHECK(counters.max_tb_latency_s > min_latency_s(Numerology(3)));  // retries happened
}

TEST_CASE("reliability converges to the HARQ residual") {
    // One packet per transport block (975-byte packets, 7800-bit TBs at a
    // dyadic coding rate) and a constant channel: measured packet loss must
    // match bler^4 within 3 binomial sigmas.
    ScenarioConfig cfg = tiny_scenario(0.0, 30.0);
    cfg.gnbs[0].max_power_dbm = -15.0;
    cfg.traffic.packet_bytes = 975;
    cfg.qos.rate_req_bps = 62.4e6;  // exactly one packet per slot

    std::vector<McsEntry> entries;
    for (int i = 0; i < kMcsCount; ++i) entries.push_back({i, 2, 512.0 / 1024.0});
    McsTable table(std::move(entries));
    cfg.mcs_table_json = table.to_json_text();

    // Center the link curve so MCS 1 runs at a BLER near 0.1.
    double pl = path_loss_db(cfg.gnbs[0], {500.0, 500.0}, 0.0, cfg.channel);
    double snr = snr_db(cfg.gnbs[0], pl, 0, cfg.channel);
    cfg.link.snr50_mcs1_db = snr - 1.5 - std::log(9.0);  // undo the mu penalty, slope 1
    LinkBlerParams link = cfg.link.to_params();
    double bler = link_bler(snr, 1, Numerology(3), link);
    CHECK(bler == doctest::Approx(0.1).epsilon(0.01));

    ClusterAssignment fixed;
    ClusterMember member;
    member.gnb_id = 0;
    member.mcs = 1;
    member.participation = 1.0;
    member.allocated_rbs = 50;  // 50 RB * 156 bits = one packet
    fixed.members.push_back(member);
    fixed.rate_met = true;
    fixed.rate_coverable = true;
    FixedAssignmentPolicy policy("fixed", fixed);

    RunMetrics m = run_scenario(cfg, policy, 21);
    double expected_loss = residual_loss(bler);
    double measured_loss = 1.0 - m.reliability;
    double delivered_packets = m.avg_rate_bps * 30.0 / 7800.0;
    double resolved = delivered_packets / m.reliability;
    double sigma = std::sqrt(expected_loss * (1.0 - expected_loss) / resolved);
    CHECK(std::abs(measured_loss - expected_loss) <= 3.0 * sigma);
}

TEST_CASE("runs are reproducible and seeds matter") {
    ScenarioConfig cfg = tiny_scenario(0.0, 2.0);
    cfg.gnbs[0].max_power_dbm = -15.0;  // mid-curve: losses depend on the draw
    cfg.channel.per_slot_fading = true;
    CqiLinkBlerSource source(cfg.link.to_params(), cfg.channel);
    McsTable table = cfg.mcs_table();
    QosSelector policy(&source, {4, false, cfg.selection.epoch_s}, &table);

    RunMetrics a = run_scenario(cfg, policy, 42);
    RunMetrics b = run_scenario(cfg, policy, 42);
    CHECK(metrics_equal(a, b));

    RunMetrics c = run_scenario(cfg, policy, 43);
    CHECK_FALSE(metrics_equal(a, c));
}

TEST_CASE("engine is policy-agnostic") {
    ScenarioConfig cfg = tiny_scenario(5.0, 2.0);
    cfg.channel.per_slot_fading = true;

    ClusterAssignment fixed;
    ClusterMember member;
    member.gnb_id = 0;
    member.mcs = 7;
    member.participation = 1.0;
    member.allocated_rbs = 40;
    fixed.members.push_back(member);
    fixed.rate_met = true;
    fixed.rate_coverable = true;

    FixedAssignmentPolicy p1("alpha", fixed);
    FixedAssignmentPolicy p2("beta", fixed);
    RunMetrics a = run_scenario(cfg, p1, 99);
    RunMetrics b = run_scenario(cfg, p2, 99);
    CHECK(metrics_equal(a, b));
}

TEST_CASE("bit conservation holds on the full default deployment") {
    // Nine cells, fading, background load, packet spanning and losses all
    // active, with the per-slot conservation assertion armed.
    ScenarioConfig cfg = ScenarioConfig::defaults();
    cfg.sim.duration_s = 5.0;
    CqiLinkBlerSource source(cfg.link.to_params(), cfg.channel);
    McsTable table = cfg.mcs_table();
    QosSelector policy(&source,
                       {cfg.selection.max_cluster_size, false, cfg.selection.epoch_s,
                        cfg.selection.allocation_headroom},
                       &table);
    EngineOptions opts;
    opts.check_conservation = true;
    for (std::uint64_t seed : {1, 2, 3}) {
        RunMetrics m = run_scenario(cfg, policy, seed, opts);
        CHECK(m.avg_rate_bps > 0.0);
        CHECK(m.reliability > 0.5);
    }
}

TEST_CASE("decision audit emits one JSON line per epoch") {
    ScenarioConfig cfg = tiny_scenario(-1000.0, 0.5);
    CqiLinkBlerSource source(cfg.link.to_params(), cfg.channel);
    McsTable table = cfg.mcs_table();
    QosSelector policy(&source, {4, false, cfg.selection.epoch_s}, &table);

    std::ostringstream audit;
    EngineOptions opts;
    opts.audit = &audit;
    run_scenario(cfg, policy, 5, opts);

    std::istringstream lines(audit.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        auto doc = nlohmann::json::parse(line);
        CHECK(doc.at("policy").get<std::string>() == "proposed");
        CHECK(doc.contains("t_s"));
        CHECK(doc.at("inputs_digest").get<std::string>().size() == 16);
        CHECK(doc.at("members").is_array());
        CHECK(doc.at("members").size() >= 1);
        const auto& member = doc.at("members")[0];
        CHECK(member.contains("gnb"));
        CHECK(member.contains("mcs"));
        CHECK(member.contains("cf"));
        CHECK(member.contains("alrb"));
        CHECK(member.contains("clamped"));
        CHECK(doc.at("flags").contains("rate_met"));
        CHECK(doc.at("flags").contains("rate_coverable"));
        CHECK(doc.at("flags").contains("constraints_relaxed"));
        CHECK(doc.at("cards").size() == cfg.gnbs.size());
        ++count;
    }
    CHECK(count == static_cast<int>(std::llround(0.5 / cfg.selection.epoch_s)));

    // The audit stream itself is reproducible.
    std::ostringstream again;
    EngineOptions opts2;
    opts2.audit = &again;
    run_scenario(cfg, policy, 5, opts2);
    CHECK(audit.str() == again.str());
}

TEST_CASE("multi-member clusters pool capacity") {
    ScenarioConfig cfg = tiny_scenario(-1000.0, 2.0);
    cfg.gnbs.push_back(make_profile(1, 3, CarrierClass::Small, {500.0, 501.0}));
    cfg.qos.rate_req_bps = 192e6;

    ClusterAssignment fixed;
    for (int id = 0; id < 2; ++id) {
        ClusterMember member;
        member.gnb_id = id;
        member.mcs = 20;
        member.participation = 0.5;
        member.allocated_rbs = 20;
        fixed.members.push_back(member);
    }
    fixed.rate_met = true;
    fixed.rate_coverable = true;
    FixedAssignmentPolicy policy("fixed", fixed);

    EngineOptions opts;
    opts.check_conservation = true;
    RunMetrics m = run_scenario(cfg, policy, 7);
    // Both members must carry traffic.
    CHECK(m.avg_rate_bps > 0.0);
    CHECK(m.reliability == 1.0);
}
