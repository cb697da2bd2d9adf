#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcsim/policy.hpp"
#include "mcsim/scenario.hpp"

namespace mcsim {

// One transport block's retransmission ledger: an initial attempt plus up
// to 3 retransmissions, each decoded 2 slots after it is sent.
struct HarqProcess {
    int attempts = 0;
    bool resolved = false;
    bool delivered = false;

    static constexpr int kMaxAttempts = 4;

    // Send-to-decode latency once resolved successfully.
    double decode_latency_s(Numerology num) const {
        return attempts * min_latency_s(num);
    }
};

HarqProcess harq_step(HarqProcess proc, bool decode_success);

// Probability a transport block survives no attempt of the HARQ cycle,
// assuming independent per-attempt failures.
double residual_loss(double bler);

// Per-gNB occupied-RB random walk, reflecting at the configured bounds.
class BackgroundLoad {
public:
    BackgroundLoad(int n_gnbs, const BackgroundConfig& cfg, Random& rng);

    void step(Random& rng);
    int occupied(int gnb_index) const { return occupied_[static_cast<std::size_t>(gnb_index)]; }

private:
    BackgroundConfig cfg_;
    std::vector<int> occupied_;
};

struct MemberTally {
    double delivered_bits = 0.0;
    double latency_sum_s = 0.0;
    std::int64_t packets_delivered = 0;
};

struct MetricsTallies {
    double duration_s = 0.0;
    double offered_bits = 0.0;
    double delivered_bits = 0.0;
    double lost_bits = 0.0;
    double inflight_bits = 0.0;  // queued or in unresolved HARQ processes at the end
    std::int64_t packets_delivered = 0;
    std::int64_t packets_lost = 0;
    double resource_hz_integral = 0.0;  // integral over time of allocated RB bandwidth
    std::map<int, MemberTally> per_member;
};

struct RunMetrics {
    double avg_rate_bps = 0.0;
    double avg_latency_s = 0.0;
    double reliability = 0.0;
    double resource_hz = 0.0;
    double se_bps_per_hz = 0.0;
    double qos_rate_score = 0.0;
    double qos_lat_score = 0.0;
    double qos_rel_score = 0.0;
};

RunMetrics collect_metrics(const MetricsTallies& tallies, const QosRequirement& req);

// (name, value) pairs in the CSV column order.
std::vector<std::pair<std::string, double>> metric_values(const RunMetrics& m);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
};

std::map<std::string, MetricSummary> aggregate_repetitions(std::span<const RunMetrics> runs);

struct EngineCounters {
    std::int64_t epochs = 0;
    std::int64_t epochs_rate_met = 0;
    std::int64_t epochs_relaxed = 0;
    std::int64_t epochs_clamped = 0;
    double min_packet_latency_s = std::numeric_limits<double>::infinity();
    double max_packet_latency_s = 0.0;
    double min_tb_latency_s = std::numeric_limits<double>::infinity();
    double max_tb_latency_s = 0.0;
};

struct EngineOptions {
    std::ostream* audit = nullptr;     // one JSON line per decision epoch
    bool check_conservation = false;   // assert offered = delivered + lost + in flight
    EngineCounters* counters = nullptr;
};

// Slot-granular downlink run under one policy and seed.
RunMetrics run_scenario(const ScenarioConfig& cfg, const Policy& policy, std::uint64_t seed,
                        const EngineOptions& opts = {});

}  // namespace mcsim
