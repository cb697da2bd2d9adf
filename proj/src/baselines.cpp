#include "mcsim/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mcsim {

namespace {

ClusterAssignment assemble(std::span<const GnbSnapshot> snapshots,
                           std::span<const std::size_t> member_rows,
                           std::span<const double> participation, const BlerMatrix& m,
                           std::span<const RateEstimate> rates, const QosRequirement& req,
                           double epoch_s, const McsTable& table, double headroom) {
    std::vector<RbDemand> demands;
    double total = 0.0;
    for (std::size_t row : member_rows) {
        RbDemand d;
        d.gnb_id = snapshots[row].id();
        d.numerology = snapshots[row].numerology();
        d.mcs = rates[row].best_mcs;
        d.bler = m.at(static_cast<int>(row), d.mcs);
        d.available_rbs = snapshots[row].available_rbs;
        demands.push_back(d);
        total += rates[row].max_es_rate_bps;
    }
    ClusterAssignment out;
    out.members = allocate_rbs(demands, participation, req, epoch_s, table, headroom);
    for (std::size_t i = 0; i < member_rows.size(); ++i) {
        out.members[i].max_es_rate_bps = rates[member_rows[i]].max_es_rate_bps;
    }
    out.total_es_rate_bps = total;
    out.rate_met = total >= req.rate_req_bps;
    out.rate_coverable = out.rate_met;
    return out;
}

}  // namespace

SnrSingleConnectivity::SnrSingleConnectivity(const BlerSource* source, const McsTable* table,
                                             double epoch_s, double allocation_headroom)
    : source_(source), table_(table), epoch_s_(epoch_s), headroom_(allocation_headroom) {
    if (!source_ || !table_) {
        throw std::invalid_argument("policy needs a BLER source and an MCS table");
    }
}

ClusterAssignment SnrSingleConnectivity::decide(std::span<const GnbSnapshot> snapshots,
                                                const DecisionContext& ctx,
                                                std::vector<ScoreCard>*) const {
    if (snapshots.empty()) {
        throw NoFeasibleClusterError("no candidate gNBs");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        double d = distance_m(snapshots[i].profile->position, ctx.ue_position);
        if (d < best_d || (d == best_d && snapshots[i].id() < snapshots[best].id())) {
            best_d = d;
            best = i;
        }
    }
    BlerMatrix m = build_bler_matrix(snapshots, *source_);
    std::vector<RateEstimate> rates = estimate_rates(m, snapshots, epoch_s_, *table_);
    const std::size_t rows[] = {best};
    const double cf[] = {1.0};
    return assemble(snapshots, rows, cf, m, rates, *ctx.req, epoch_s_, *table_, headroom_);
}

LoadBalancingMc::LoadBalancingMc(const BlerSource* source, const McsTable* table, double epoch_s,
                                 int max_cluster_size, double allocation_headroom)
    : source_(source),
      table_(table),
      epoch_s_(epoch_s),
      max_cluster_size_(max_cluster_size),
      headroom_(allocation_headroom) {
    if (!source_ || !table_) {
        throw std::invalid_argument("policy needs a BLER source and an MCS table");
    }
    if (max_cluster_size_ < 1) {
        throw std::invalid_argument("max cluster size must be >= 1");
    }
}

ClusterAssignment LoadBalancingMc::decide(std::span<const GnbSnapshot> snapshots,
                                          const DecisionContext& ctx,
                                          std::vector<ScoreCard>*) const {
    if (snapshots.empty()) {
        throw NoFeasibleClusterError("no candidate gNBs");
    }
    std::vector<std::size_t> order(snapshots.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (snapshots[a].available_rbs != snapshots[b].available_rbs) {
            return snapshots[a].available_rbs > snapshots[b].available_rbs;
        }
        return snapshots[a].id() < snapshots[b].id();
    });

    BlerMatrix m = build_bler_matrix(snapshots, *source_);
    std::vector<RateEstimate> rates = estimate_rates(m, snapshots, epoch_s_, *table_);

    std::vector<std::size_t> members;
    double total = 0.0;
    for (std::size_t row : order) {
        if (static_cast<int>(members.size()) >= max_cluster_size_) break;
        members.push_back(row);
        total += rates[row].max_es_rate_bps;
        if (total >= ctx.req->rate_req_bps) break;
    }

    double avail_total = 0.0;
    for (std::size_t row : members) avail_total += snapshots[row].available_rbs;
    std::vector<double> cf(members.size(), 1.0 / static_cast<double>(members.size()));
    if (avail_total > 0.0) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            cf[i] = snapshots[members[i]].available_rbs / avail_total;
        }
    }
    return assemble(snapshots, members, cf, m, rates, *ctx.req, epoch_s_, *table_, headroom_);
}

}  // namespace mcsim
