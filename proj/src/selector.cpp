#include "mcsim/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcsim {

void QosRequirement::validate() const {
    if (!(rate_req_bps > 0.0)) {
        throw std::invalid_argument("rate requirement must be > 0");
    }
    if (!(rel_req > 0.0) || rel_req > 1.0) {
        throw std::invalid_argument("reliability requirement must be in (0,1]");
    }
    if (!(lat_req_s > 0.0)) {
        throw std::invalid_argument("latency requirement must be > 0");
    }
    double sum = weights.rate + weights.reliability + weights.latency +
                 weights.spectrum_efficiency;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("QoS score weights must sum to 1");
    }
}

BlerMatrix::BlerMatrix(int n_gnbs) : n_(n_gnbs) {
    if (n_gnbs < 0) {
        throw std::invalid_argument("BLER matrix row count must be >= 0");
    }
    values_.assign(static_cast<std::size_t>(n_) * kMaxMcs, 0.0);
}

double BlerMatrix::at(int gnb_row, int mcs) const {
    if (gnb_row < 0 || gnb_row >= n_ || mcs < kMinMcs || mcs > kMaxMcs) {
        throw std::invalid_argument("BLER matrix index out of range");
    }
    return values_[static_cast<std::size_t>(gnb_row) * kMaxMcs +
                   static_cast<std::size_t>(mcs - 1)];
}

void BlerMatrix::set(int gnb_row, int mcs, double bler) {
    if (gnb_row < 0 || gnb_row >= n_ || mcs < kMinMcs || mcs > kMaxMcs) {
        throw std::invalid_argument("BLER matrix index out of range");
    }
    if (bler < 0.0 || bler > 1.0) {
        throw std::invalid_argument("BLER must be in [0,1]");
    }
    values_[static_cast<std::size_t>(gnb_row) * kMaxMcs + static_cast<std::size_t>(mcs - 1)] =
        bler;
}

BlerMatrix build_bler_matrix(std::span<const GnbSnapshot> snapshots, const BlerSource& source) {
    BlerMatrix m(static_cast<int>(snapshots.size()));
    std::array<double, 28> row{};
    for (int i = 0; i < m.gnb_count(); ++i) {
        source.fill_row(snapshots[static_cast<std::size_t>(i)], row);
        for (int mcs = kMinMcs; mcs <= kMaxMcs; ++mcs) {
            m.set(i, mcs, row[static_cast<std::size_t>(mcs)]);
        }
    }
    return m;
}

std::vector<RateEstimate> estimate_rates(const BlerMatrix& m,
                                         std::span<const GnbSnapshot> snapshots, double t_s,
                                         const McsTable& table) {
    if (!(t_s > 0.0)) {
        throw std::invalid_argument("estimate_rates requires t > 0");
    }
    std::vector<RateEstimate> out(snapshots.size());
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const GnbSnapshot& snap = snapshots[i];
        double slots = static_cast<double>(slot_count(t_s, snap.numerology()));
        RateEstimate best;
        best.max_es_rate_bps = -1.0;
        for (int mcs = kMinMcs; mcs <= kMaxMcs; ++mcs) {
            double tbs = static_cast<double>(tbs_bits(snap.available_rbs, mcs, table));
            double rate = (1.0 - m.at(static_cast<int>(i), mcs)) * slots * tbs / t_s;
            if (rate > best.max_es_rate_bps) {
                best.max_es_rate_bps = rate;
                best.best_mcs = mcs;
            }
        }
        out[i] = best;
    }
    return out;
}

std::vector<double> estimate_se(std::span<const RateEstimate> rates,
                                std::span<const GnbSnapshot> snapshots) {
    if (rates.size() != snapshots.size()) {
        throw std::invalid_argument("rates/snapshots size mismatch");
    }
    std::vector<double> out(rates.size(), 0.0);
    for (std::size_t i = 0; i < rates.size(); ++i) {
        double cbw = consumed_bandwidth_hz(snapshots[i].available_rbs, snapshots[i].numerology());
        out[i] = spectrum_efficiency(rates[i].max_es_rate_bps, cbw > 0.0 ? cbw : 0.0);
    }
    return out;
}

std::vector<ScoreCard> qos_scores(std::span<const GnbSnapshot> snapshots,
                                  std::span<const RateEstimate> rates, const BlerMatrix& m,
                                  const QosRequirement& req, bool literal_rel_score) {
    req.validate();
    std::vector<ScoreCard> cards(snapshots.size());
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        ScoreCard& c = cards[i];
        const GnbSnapshot& snap = snapshots[i];
        c.gnb_id = snap.id();
        c.max_es_rate_bps = rates[i].max_es_rate_bps;
        c.best_mcs = rates[i].best_mcs;

        c.rate_score = std::min(1.0, c.max_es_rate_bps / req.rate_req_bps);

        double bler_star = m.at(static_cast<int>(i), c.best_mcs);
        c.rel_score = literal_rel_score ? std::min(1.0, bler_star / req.rel_req)
                                        : std::min(1.0, (1.0 - bler_star) / req.rel_req);

        double min_lat = min_latency_s(snap.numerology());
        c.lat_score = std::min(1.0, req.lat_req_s / min_lat);
        c.lat_feasible = min_lat <= req.lat_req_s;

        double min_bler = 1.0;
        for (int mcs = kMinMcs; mcs <= kMaxMcs; ++mcs) {
            min_bler = std::min(min_bler, m.at(static_cast<int>(i), mcs));
        }
        c.rel_feasible = (1.0 - min_bler) >= req.rel_req;
    }
    return cards;
}

std::vector<double> se_scores(std::span<const double> es_se) {
    double max_se = 0.0;
    for (double v : es_se) max_se = std::max(max_se, v);
    std::vector<double> out(es_se.size(), 0.0);
    if (max_se <= 0.0) return out;
    for (std::size_t i = 0; i < es_se.size(); ++i) out[i] = es_se[i] / max_se;
    return out;
}

double overall_score(const ScoreCard& card, const QosWeights& w) {
    return w.rate * card.rate_score + w.reliability * card.rel_score +
           w.latency * card.lat_score + w.spectrum_efficiency * card.se_score;
}

namespace {

bool score_order(const ScoreCard& a, const ScoreCard& b) {
    if (a.overall != b.overall) return a.overall > b.overall;
    if (a.max_es_rate_bps != b.max_es_rate_bps) return a.max_es_rate_bps > b.max_es_rate_bps;
    return a.gnb_id < b.gnb_id;
}

}  // namespace

ClusterAssignment select_cluster(std::span<const ScoreCard> cards, const QosRequirement& req,
                                 int max_cluster_size) {
    if (cards.empty()) {
        throw NoFeasibleClusterError("no candidate gNBs");
    }
    if (max_cluster_size < 1) {
        throw std::invalid_argument("max cluster size must be >= 1");
    }

    std::vector<ScoreCard> candidates;
    for (const ScoreCard& c : cards) {
        if (c.lat_feasible && c.rel_feasible) candidates.push_back(c);
    }

    ClusterAssignment out;

    // Coverability is a property of the filtered candidate set: the
    // requirement is reachable within the size cap iff the top rates sum
    // to it.
    std::vector<double> top_rates;
    top_rates.reserve(candidates.size());
    for (const ScoreCard& c : candidates) top_rates.push_back(c.max_es_rate_bps);
    std::sort(top_rates.rbegin(), top_rates.rend());
    double best_total = 0.0;
    for (std::size_t i = 0; i < top_rates.size() && i < static_cast<std::size_t>(max_cluster_size);
         ++i) {
        best_total += top_rates[i];
    }
    out.rate_coverable = best_total >= req.rate_req_bps;

    if (candidates.empty()) {
        // Every gNB failed a hard QoS constraint. The cluster must still be
        // nonempty, so fall back to the best-scored gNB and flag it.
        out.constraints_relaxed = true;
        candidates.assign(cards.begin(), cards.end());
        std::sort(candidates.begin(), candidates.end(), score_order);
        candidates.resize(1);
    }
    std::sort(candidates.begin(), candidates.end(), score_order);

    double total = 0.0;
    for (const ScoreCard& c : candidates) {
        if (static_cast<int>(out.members.size()) >= max_cluster_size) break;
        ClusterMember m;
        m.gnb_id = c.gnb_id;
        m.mcs = c.best_mcs;
        m.max_es_rate_bps = c.max_es_rate_bps;
        out.members.push_back(m);
        total += c.max_es_rate_bps;
        if (total >= req.rate_req_bps) break;
    }
    out.total_es_rate_bps = total;
    out.rate_met = total >= req.rate_req_bps;
    return out;
}

std::vector<double> participation_factors(std::span<const double> member_rates_bps) {
    if (member_rates_bps.empty()) {
        throw std::invalid_argument("participation_factors needs at least one member");
    }
    double total = 0.0;
    for (double r : member_rates_bps) {
        if (r < 0.0) throw std::invalid_argument("member rates must be >= 0");
        total += r;
    }
    std::vector<double> cf(member_rates_bps.size());
    if (total <= 0.0) {
        std::fill(cf.begin(), cf.end(), 1.0 / static_cast<double>(cf.size()));
        return cf;
    }
    for (std::size_t i = 0; i < cf.size(); ++i) cf[i] = member_rates_bps[i] / total;
    return cf;
}

std::vector<ClusterMember> allocate_rbs(std::span<const RbDemand> demands,
                                        std::span<const double> participation,
                                        const QosRequirement& req, double t_s,
                                        const McsTable& table, double headroom) {
    if (demands.size() != participation.size()) {
        throw std::invalid_argument("demands/participation size mismatch");
    }
    if (!(headroom >= 1.0)) {
        throw std::invalid_argument("allocation headroom must be >= 1");
    }
    std::vector<ClusterMember> members(demands.size());
    for (std::size_t i = 0; i < demands.size(); ++i) {
        const RbDemand& d = demands[i];
        ClusterMember& m = members[i];
        m.gnb_id = d.gnb_id;
        m.mcs = d.mcs;
        m.participation = participation[i];
        m.est_bler = d.bler;

        double slots = static_cast<double>(slot_count(t_s, d.numerology));
        const McsEntry& e = table.at(d.mcs);
        double per_rb_bits = kDataRePerRb * e.coding_rate * e.bits_per_symbol;
        double denom = slots * (1.0 - d.bler) * per_rb_bits;
        double demand_bits = participation[i] * req.rate_req_bps * t_s * headroom;

        int rbs;
        if (demand_bits <= 0.0) {
            rbs = 0;
        } else if (denom <= 0.0) {
            rbs = std::numeric_limits<int>::max();
        } else {
            double exact = demand_bits / denom;
            rbs = static_cast<int>(std::ceil(exact - 1e-9));
            rbs = std::max(rbs, 1);
        }
        if (rbs > d.available_rbs) {
            m.allocated_rbs = d.available_rbs;
            m.clamped = true;
        } else {
            m.allocated_rbs = rbs;
        }
    }
    return members;
}

QosSelector::QosSelector(const BlerSource* source, SelectorConfig cfg, const McsTable* table)
    : source_(source), cfg_(cfg), table_(table) {
    if (!source_ || !table_) {
        throw std::invalid_argument("QosSelector needs a BLER source and an MCS table");
    }
}

ClusterAssignment QosSelector::decide(std::span<const GnbSnapshot> snapshots,
                                      const DecisionContext& ctx,
                                      std::vector<ScoreCard>* cards_out) const {
    const QosRequirement& req = *ctx.req;
    req.validate();
    BlerMatrix m = build_bler_matrix(snapshots, *source_);
    std::vector<RateEstimate> rates = estimate_rates(m, snapshots, cfg_.epoch_s, *table_);
    std::vector<double> es_se = estimate_se(rates, snapshots);
    std::vector<ScoreCard> cards =
        qos_scores(snapshots, rates, m, req, cfg_.literal_rel_score);
    std::vector<double> se = se_scores(es_se);
    for (std::size_t i = 0; i < cards.size(); ++i) {
        cards[i].es_se = es_se[i];
        cards[i].se_score = se[i];
        cards[i].overall = overall_score(cards[i], req.weights);
    }
    ClusterAssignment cluster = select_cluster(cards, req, cfg_.max_cluster_size);

    std::vector<double> member_rates;
    std::vector<RbDemand> demands;
    for (const ClusterMember& member : cluster.members) {
        for (std::size_t i = 0; i < snapshots.size(); ++i) {
            if (snapshots[i].id() != member.gnb_id) continue;
            member_rates.push_back(rates[i].max_es_rate_bps);
            RbDemand d;
            d.gnb_id = member.gnb_id;
            d.numerology = snapshots[i].numerology();
            d.mcs = member.mcs;
            d.bler = m.at(static_cast<int>(i), member.mcs);
            d.available_rbs = snapshots[i].available_rbs;
            demands.push_back(d);
            break;
        }
    }
    std::vector<double> cf = participation_factors(member_rates);
    std::vector<ClusterMember> allocated =
        allocate_rbs(demands, cf, req, cfg_.epoch_s, *table_, cfg_.allocation_headroom);
    for (std::size_t i = 0; i < allocated.size(); ++i) {
        allocated[i].max_es_rate_bps = member_rates[i];
    }
    cluster.members = std::move(allocated);

    if (cards_out) *cards_out = std::move(cards);
    return cluster;
}

}  // namespace mcsim
