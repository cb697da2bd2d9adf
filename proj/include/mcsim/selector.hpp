#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcsim/estimator.hpp"
#include "mcsim/policy.hpp"
#include "mcsim/radio.hpp"

namespace mcsim {

struct QosWeights {
    double rate = 0.25;
    double reliability = 0.25;
    double latency = 0.25;
    double spectrum_efficiency = 0.25;
};

struct QosRequirement {
    double rate_req_bps = 150e6;
    double rel_req = 0.99;
    double lat_req_s = 0.4e-3;
    QosWeights weights;

    void validate() const;
};

// B x 27 estimated BLER matrix; column j holds MCS j (1..27).
class BlerMatrix {
public:
    explicit BlerMatrix(int n_gnbs);

    int gnb_count() const { return n_; }
    double at(int gnb_row, int mcs) const;
    void set(int gnb_row, int mcs, double bler);

private:
    int n_;
    std::vector<double> values_;  // n_ rows x 27 columns
};

struct RateEstimate {
    double max_es_rate_bps = 0.0;  // best achievable estimated rate
    int best_mcs = kMinMcs;        // argmax; ties resolve to the lower index
};

struct ScoreCard {
    int gnb_id = 0;
    double max_es_rate_bps = 0.0;
    int best_mcs = kMinMcs;
    double es_se = 0.0;
    double rate_score = 0.0;
    double rel_score = 0.0;
    double lat_score = 0.0;
    double se_score = 0.0;
    double overall = 0.0;
    bool lat_feasible = true;  // min latency within the requirement
    bool rel_feasible = true;  // some MCS meets the reliability requirement
};

struct ClusterMember {
    int gnb_id = 0;
    int mcs = kMinMcs;
    double participation = 0.0;  // share of the UE traffic
    int allocated_rbs = 0;
    bool clamped = false;  // demand exceeded the gNB's available RBs
    double est_bler = 0.0;
    double max_es_rate_bps = 0.0;
};

struct ClusterAssignment {
    std::vector<ClusterMember> members;
    double total_es_rate_bps = 0.0;
    bool rate_met = false;        // the chosen members' estimated rates cover the requirement
    bool rate_coverable = false;  // some candidate subset within the size cap could cover it
    bool constraints_relaxed = false;  // no candidate survived the hard QoS filters

    int degree() const { return static_cast<int>(members.size()); }
};

struct SelectorConfig {
    int max_cluster_size = 4;
    bool literal_rel_score = false;  // score raw BLER/RelReq instead of (1-BLER)/RelReq
    double epoch_s = 0.1;
    // Provisioning margin on top of the expected-loss compensation; BLER
    // estimates carry quantization and staleness error, and sizing at the
    // point estimate under-serves whenever the truth lands above it.
    double allocation_headroom = 1.25;
};

BlerMatrix build_bler_matrix(std::span<const GnbSnapshot> snapshots, const BlerSource& source);

// Estimated best rate per gNB over its currently available RBs.
std::vector<RateEstimate> estimate_rates(const BlerMatrix& m,
                                         std::span<const GnbSnapshot> snapshots, double t_s,
                                         const McsTable& table);

std::vector<double> estimate_se(std::span<const RateEstimate> rates,
                                std::span<const GnbSnapshot> snapshots);

// Fills rate/reliability/latency scores (spectrum-efficiency score is
// normalized separately across gNBs).
std::vector<ScoreCard> qos_scores(std::span<const GnbSnapshot> snapshots,
                                  std::span<const RateEstimate> rates, const BlerMatrix& m,
                                  const QosRequirement& req, bool literal_rel_score = false);

std::vector<double> se_scores(std::span<const double> es_se);

double overall_score(const ScoreCard& card, const QosWeights& weights);

// Greedy cluster build over hard-filtered, score-sorted candidates.
ClusterAssignment select_cluster(std::span<const ScoreCard> cards, const QosRequirement& req,
                                 int max_cluster_size);

std::vector<double> participation_factors(std::span<const double> member_rates_bps);

struct RbDemand {
    int gnb_id = 0;
    Numerology numerology{0};
    int mcs = kMinMcs;
    double bler = 0.0;
    int available_rbs = 0;
};

// Per-member RB counts sized to carry each member's traffic share at its
// chosen MCS, accounting for expected first-attempt losses plus a
// provisioning margin.
std::vector<ClusterMember> allocate_rbs(std::span<const RbDemand> demands,
                                        std::span<const double> participation,
                                        const QosRequirement& req, double t_s,
                                        const McsTable& table, double headroom = 1.0);

// The QoS-aware policy: BLER matrix -> rate/SE estimates -> four-way scores
// -> greedy cluster -> participation factors -> RB allocation.
class QosSelector final : public Policy {
public:
    QosSelector(const BlerSource* source, SelectorConfig cfg, const McsTable* table);

    std::string name() const override { return "proposed"; }
    ClusterAssignment decide(std::span<const GnbSnapshot> snapshots, const DecisionContext& ctx,
                             std::vector<ScoreCard>* cards_out = nullptr) const override;

    const SelectorConfig& config() const { return cfg_; }

private:
    const BlerSource* source_;
    SelectorConfig cfg_;
    const McsTable* table_;
};

}  // namespace mcsim
