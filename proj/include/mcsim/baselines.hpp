#pragma once

#include "mcsim/selector.hpp"

namespace mcsim {

// Single-connectivity benchmark: attach to the geometrically closest gNB,
// ties to the lower id.
class SnrSingleConnectivity final : public Policy {
public:
    SnrSingleConnectivity(const BlerSource* source, const McsTable* table, double epoch_s,
                          double allocation_headroom = 1.25);

    std::string name() const override { return "snr"; }
    ClusterAssignment decide(std::span<const GnbSnapshot> snapshots, const DecisionContext& ctx,
                             std::vector<ScoreCard>* cards_out = nullptr) const override;

private:
    const BlerSource* source_;
    const McsTable* table_;
    double epoch_s_;
    double headroom_;
};

// Load-balancing multi-connectivity proxy (DRLMC stand-in): grows the
// cluster in descending available-RB order until the rate requirement is
// covered, splitting traffic proportionally to availability.
class LoadBalancingMc final : public Policy {
public:
    LoadBalancingMc(const BlerSource* source, const McsTable* table, double epoch_s,
                    int max_cluster_size, double allocation_headroom = 1.25);

    std::string name() const override { return "lbmc"; }
    ClusterAssignment decide(std::span<const GnbSnapshot> snapshots, const DecisionContext& ctx,
                             std::vector<ScoreCard>* cards_out = nullptr) const override;

private:
    const BlerSource* source_;
    const McsTable* table_;
    double epoch_s_;
    int max_cluster_size_;
    double headroom_;
};

}  // namespace mcsim
