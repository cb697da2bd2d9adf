#include "mcsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace mcsim {

HarqProcess harq_step(HarqProcess proc, bool decode_success) {
    if (proc.resolved) {
        throw std::logic_error("harq_step on a resolved process");
    }
    ++proc.attempts;
    if (decode_success) {
        proc.resolved = true;
        proc.delivered = true;
    } else if (proc.attempts >= HarqProcess::kMaxAttempts) {
        proc.resolved = true;
        proc.delivered = false;
    }
    return proc;
}

double residual_loss(double bler) {
    if (bler < 0.0 || bler > 1.0) {
        throw std::invalid_argument("BLER must be in [0,1]");
    }
    return bler * bler * bler * bler;
}

BackgroundLoad::BackgroundLoad(int n_gnbs, const BackgroundConfig& cfg, Random& rng)
    : cfg_(cfg) {
    occupied_.reserve(static_cast<std::size_t>(n_gnbs));
    for (int i = 0; i < n_gnbs; ++i) {
        occupied_.push_back(rng.uniform_int(cfg_.occupied_min, cfg_.occupied_max));
    }
}

void BackgroundLoad::step(Random& rng) {
    for (int& occ : occupied_) {
        int delta = rng.bernoulli(0.5) ? cfg_.step_rbs : -cfg_.step_rbs;
        occ += delta;
        if (occ > cfg_.occupied_max) occ = 2 * cfg_.occupied_max - occ;
        if (occ < cfg_.occupied_min) occ = 2 * cfg_.occupied_min - occ;
        occ = std::clamp(occ, cfg_.occupied_min, cfg_.occupied_max);
    }
}

RunMetrics collect_metrics(const MetricsTallies& t, const QosRequirement& req) {
    req.validate();
    if (!(t.duration_s > 0.0)) {
        throw std::invalid_argument("metrics need a positive duration");
    }
    RunMetrics m;
    m.avg_rate_bps = t.delivered_bits / t.duration_s;

    double weight_sum = 0.0;
    double weighted_latency = 0.0;
    for (const auto& [gnb_id, tally] : t.per_member) {
        if (tally.packets_delivered <= 0 || tally.delivered_bits <= 0.0) continue;
        double mean_latency = tally.latency_sum_s / static_cast<double>(tally.packets_delivered);
        weight_sum += tally.delivered_bits;
        weighted_latency += tally.delivered_bits * mean_latency;
    }
    m.avg_latency_s = weight_sum > 0.0 ? weighted_latency / weight_sum : 0.0;

    std::int64_t resolved = t.packets_delivered + t.packets_lost;
    if (resolved > 0) {
        m.reliability = static_cast<double>(t.packets_delivered) / static_cast<double>(resolved);
    } else {
        m.reliability = t.offered_bits > 0.0 ? 0.0 : 1.0;
    }

    m.resource_hz = t.resource_hz_integral / t.duration_s;
    m.se_bps_per_hz = m.resource_hz > 0.0 ? m.avg_rate_bps / m.resource_hz : 0.0;

    m.qos_rate_score = std::min(1.0, m.avg_rate_bps / req.rate_req_bps);
    m.qos_rel_score = std::min(1.0, m.reliability / req.rel_req);
    if (t.packets_delivered <= 0) {
        m.qos_lat_score = 0.0;
    } else if (m.avg_latency_s <= 0.0) {
        m.qos_lat_score = 1.0;
    } else {
        m.qos_lat_score = std::min(1.0, req.lat_req_s / m.avg_latency_s);
    }
    return m;
}

std::vector<std::pair<std::string, double>> metric_values(const RunMetrics& m) {
    return {
        {"avg_rate_bps", m.avg_rate_bps},
        {"avg_latency_s", m.avg_latency_s},
        {"reliability", m.reliability},
        {"resource_hz", m.resource_hz},
        {"se_bps_per_hz", m.se_bps_per_hz},
        {"qos_rate_score", m.qos_rate_score},
        {"qos_lat_score", m.qos_lat_score},
        {"qos_rel_score", m.qos_rel_score},
    };
}

std::map<std::string, MetricSummary> aggregate_repetitions(std::span<const RunMetrics> runs) {
    if (runs.empty()) {
        throw std::invalid_argument("no runs to aggregate");
    }
    std::map<std::string, std::vector<double>> columns;
    for (const RunMetrics& r : runs) {
        for (const auto& [name, value] : metric_values(r)) {
            columns[name].push_back(value);
        }
    }
    std::map<std::string, MetricSummary> out;
    for (const auto& [name, values] : columns) {
        MetricSummary s;
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        if (values.size() > 1) {
            double sq = 0.0;
            for (double v : values) sq += (v - s.mean) * (v - s.mean);
            s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
        }
        out[name] = s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// slot engine

namespace {

struct Packet {
    std::int64_t arrival_tick = 0;
    std::int64_t first_tx_tick = -1;  // first time any bit went on the channel
    int bits_to_queue = 0;    // not yet placed into a transport block
    int bits_unresolved = 0;  // not yet delivered or lost
    bool dead = false;
};

struct Segment {
    std::int64_t packet_id = 0;
    int bits = 0;
};

struct Chain {
    HarqProcess harq;
    std::int64_t first_send_tick = 0;
    std::int64_t decode_tick = 0;
    bool attempt_success = false;  // outcome of the attempt in flight
    int mcs = kMinMcs;
    std::int64_t tb_bits = 0;
    std::vector<Segment> segments;
};

struct GnbRuntime {
    const GnbProfile* profile = nullptr;
    std::int64_t slot_ticks = 1;
    CqiHistory history{1};
    ShadowingProcess shadow;
    double mean_snr_db = -400.0;  // refreshed each epoch
    // Current-epoch allocation; zero when outside the serving cluster.
    int alrb = 0;
    int mcs = kMinMcs;
    std::int64_t tbs = 0;
    std::vector<Chain> pending;

    GnbRuntime(const GnbProfile* p, std::int64_t ticks, int chl, ShadowingProcess s)
        : profile(p), slot_ticks(ticks), history(chl), shadow(std::move(s)) {}
};

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xFF;
        h *= 0x100000001B3ULL;
    }
    return h;
}

class SlotEngine {
public:
    SlotEngine(const ScenarioConfig& cfg, const Policy& policy, std::uint64_t seed,
               const EngineOptions& opts)
        : cfg_(cfg),
          policy_(policy),
          opts_(opts),
          table_(cfg.mcs_table()),
          link_(cfg.link.to_params()),
          phy_rng_(mix_seed(seed, 1)),
          mobility_rng_(mix_seed(seed, 2)),
          background_rng_(mix_seed(seed, 3)),
          measure_rng_(mix_seed(seed, 4)),
          init_rng_(mix_seed(seed, 5)),
          background_(static_cast<int>(cfg.gnbs.size()), cfg.background, init_rng_) {
        int mu_max = 0;
        for (const GnbProfile& g : cfg_.gnbs) mu_max = std::max(mu_max, g.numerology.mu());
        tick_s_ = 1e-3 / (1 << mu_max);
        total_ticks_ = std::llround(cfg_.sim.duration_s / tick_s_);
        epoch_ticks_ = std::max<std::int64_t>(1, std::llround(cfg_.selection.epoch_s / tick_s_));
        background_ticks_ =
            std::max<std::int64_t>(1, std::llround(cfg_.background.period_s / tick_s_));
        packet_bits_ = cfg_.traffic.packet_bytes * 8;
        offered_bps_ = cfg_.offered_bps();

        Rect region = cfg_.mobility_region();
        ue_ = random_mobility_state(region, {cfg_.mobility.v_min_mps, cfg_.mobility.v_max_mps},
                                    mobility_rng_);
        for (const GnbProfile& g : cfg_.gnbs) {
            std::int64_t slot_ticks = std::int64_t{1} << (mu_max - g.numerology.mu());
            gnbs_.emplace_back(&g, slot_ticks, cfg_.selection.chl,
                               ShadowingProcess(cfg_.channel.shadow_sigma_db(g.carrier_class),
                                                cfg_.channel.decorrelation_m, init_rng_));
        }
        // Attachment measurement phase: the UE reports a full CQI window
        // before any data flows, so the first decision is never cold.
        for (GnbRuntime& g : gnbs_) {
            double pl = path_loss_db(*g.profile, ue_.position, g.shadow.value_db(), cfg_.channel);
            double mean_snr = snr_db(*g.profile, pl, g.profile->power_level, cfg_.channel);
            for (int i = 0; i < cfg_.selection.chl - 1; ++i) {
                double measured =
                    mean_snr + (cfg_.channel.per_slot_fading
                                    ? fading_db(measure_rng_, cfg_.channel.fading_diversity)
                                    : 0.0);
                g.history.push(snr_to_cqi(measured, cfg_.channel));
            }
        }
    }

    RunMetrics run() {
        for (std::int64_t tick = 0; tick < total_ticks_; ++tick) {
            if (tick > 0 && tick % background_ticks_ == 0) background_.step(background_rng_);
            if (tick % epoch_ticks_ == 0) start_epoch(tick);
            accept_arrivals(tick);
            for (GnbRuntime& g : gnbs_) {
                if (tick % g.slot_ticks == 0) serve_slot(g, tick);
            }
            if (opts_.check_conservation) check_conservation();
        }
        finalize();
        return collect_metrics(tallies_, cfg_.qos);
    }

private:
    void start_epoch(std::int64_t tick) {
        if (tick > 0) {
            Position before = ue_.position;
            ue_ = step_mobility(ue_, cfg_.selection.epoch_s, cfg_.mobility_region(),
                                {cfg_.mobility.v_min_mps, cfg_.mobility.v_max_mps},
                                mobility_rng_);
            double moved = distance_m(before, ue_.position);
            for (GnbRuntime& g : gnbs_) g.shadow.advance(moved, mobility_rng_);
        }

        std::vector<GnbSnapshot> snapshots;
        snapshots.reserve(gnbs_.size());
        for (std::size_t i = 0; i < gnbs_.size(); ++i) {
            GnbRuntime& g = gnbs_[i];
            double pl = path_loss_db(*g.profile, ue_.position, g.shadow.value_db(), cfg_.channel);
            g.mean_snr_db = snr_db(*g.profile, pl, g.profile->power_level, cfg_.channel);
            double measured =
                g.mean_snr_db + (cfg_.channel.per_slot_fading
                                     ? fading_db(measure_rng_, cfg_.channel.fading_diversity)
                                     : 0.0);
            g.history.push(snr_to_cqi(measured, cfg_.channel));

            GnbSnapshot snap;
            snap.profile = g.profile;
            snap.available_rbs =
                std::max(0, g.profile->total_rbs - background_.occupied(static_cast<int>(i)));
            snap.history = g.history;
            snapshots.push_back(std::move(snap));
        }

        DecisionContext ctx;
        ctx.req = &cfg_.qos;
        ctx.ue_position = ue_.position;
        std::vector<ScoreCard> cards;
        ClusterAssignment assignment = policy_.decide(snapshots, ctx, &cards);

        for (GnbRuntime& g : gnbs_) {
            g.alrb = 0;
            g.tbs = 0;
        }
        double epoch_span_s =
            static_cast<double>(std::min(epoch_ticks_, total_ticks_ - tick)) * tick_s_;
        bool clamped = false;
        for (const ClusterMember& m : assignment.members) {
            for (GnbRuntime& g : gnbs_) {
                if (g.profile->id != m.gnb_id) continue;
                g.alrb = m.allocated_rbs;
                g.mcs = m.mcs;
                g.tbs = g.alrb > 0 ? tbs_bits(g.alrb, g.mcs, table_) : 0;
                tallies_.resource_hz_integral +=
                    consumed_bandwidth_hz(g.alrb, g.profile->numerology) * epoch_span_s;
                break;
            }
            clamped = clamped || m.clamped;
        }
        if (opts_.counters) {
            ++opts_.counters->epochs;
            if (assignment.rate_met) ++opts_.counters->epochs_rate_met;
            if (assignment.constraints_relaxed) ++opts_.counters->epochs_relaxed;
            if (clamped) ++opts_.counters->epochs_clamped;
        }
        if (opts_.audit) {
            write_audit(tick, snapshots, cards, assignment);
        }
    }

    void accept_arrivals(std::int64_t tick) {
        credit_bits_ += offered_bps_ * tick_s_;
        while (credit_bits_ >= static_cast<double>(packet_bits_)) {
            credit_bits_ -= static_cast<double>(packet_bits_);
            Packet p;
            p.arrival_tick = tick;
            p.bits_to_queue = packet_bits_;
            p.bits_unresolved = packet_bits_;
            packets_.push_back(p);
            queue_.push_back(first_packet_id_ + static_cast<std::int64_t>(packets_.size()) - 1);
            queued_bits_ += packet_bits_;
            tallies_.offered_bits += static_cast<double>(packet_bits_);
        }
    }

    Packet& packet(std::int64_t id) {
        return packets_[static_cast<std::size_t>(id - first_packet_id_)];
    }

    double instantaneous_snr(const GnbRuntime& g) {
        return g.mean_snr_db +
               (cfg_.channel.per_slot_fading
                    ? fading_db(phy_rng_, cfg_.channel.fading_diversity)
                    : 0.0);
    }

    void serve_slot(GnbRuntime& g, std::int64_t tick) {
        bool slot_taken = false;

        // Decode events due now; a failed attempt retransmits in this slot.
        for (std::size_t i = 0; i < g.pending.size();) {
            Chain& c = g.pending[i];
            if (c.decode_tick != tick) {
                ++i;
                continue;
            }
            c.harq = harq_step(c.harq, c.attempt_success);
            if (c.harq.resolved) {
                if (c.harq.delivered) {
                    deliver_chain(g, c, tick);
                } else {
                    lose_chain(c);
                }
                g.pending.erase(g.pending.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                double bler = link_bler(instantaneous_snr(g), c.mcs, g.profile->numerology, link_);
                c.attempt_success = !phy_rng_.bernoulli(bler);
                c.decode_tick = tick + 2 * g.slot_ticks;
                slot_taken = true;
                ++i;
            }
        }
        if (slot_taken || g.tbs <= 0 || queued_bits_ <= 0) return;

        // New transport block from the shared queue.
        Chain c;
        c.mcs = g.mcs;
        std::int64_t capacity = g.tbs;
        while (capacity > 0 && !queue_.empty()) {
            std::int64_t pid = queue_.front();
            // Entries of packets that died mid-flight (queued remainder
            // dropped) may already be compacted away.
            if (pid < first_packet_id_) {
                queue_.pop_front();
                continue;
            }
            Packet& p = packet(pid);
            if (p.bits_to_queue <= 0) {
                queue_.pop_front();
                continue;
            }
            int take = static_cast<int>(std::min<std::int64_t>(capacity, p.bits_to_queue));
            if (p.first_tx_tick < 0) p.first_tx_tick = tick;
            p.bits_to_queue -= take;
            queued_bits_ -= take;
            capacity -= take;
            c.segments.push_back({pid, take});
            if (p.bits_to_queue == 0) queue_.pop_front();
        }
        if (c.segments.empty()) return;
        c.tb_bits = g.tbs - capacity;
        c.first_send_tick = tick;
        double bler = link_bler(instantaneous_snr(g), c.mcs, g.profile->numerology, link_);
        c.attempt_success = !phy_rng_.bernoulli(bler);
        c.decode_tick = tick + 2 * g.slot_ticks;
        g.pending.push_back(std::move(c));
    }

    void deliver_chain(GnbRuntime& g, const Chain& c, std::int64_t tick) {
        tallies_.delivered_bits += static_cast<double>(c.tb_bits);
        MemberTally& tally = tallies_.per_member[g.profile->id];
        tally.delivered_bits += static_cast<double>(c.tb_bits);
        if (opts_.counters) {
            double tb_latency = static_cast<double>(tick - c.first_send_tick) * tick_s_;
            opts_.counters->min_tb_latency_s =
                std::min(opts_.counters->min_tb_latency_s, tb_latency);
            opts_.counters->max_tb_latency_s =
                std::max(opts_.counters->max_tb_latency_s, tb_latency);
        }
        for (const Segment& s : c.segments) {
            Packet& p = packet(s.packet_id);
            p.bits_unresolved -= s.bits;
            if (p.bits_unresolved == 0 && !p.dead) {
                ++tallies_.packets_delivered;
                ++tally.packets_delivered;
                // Channel latency: first transmission to final decode.
                double latency = static_cast<double>(tick - p.first_tx_tick) * tick_s_;
                tally.latency_sum_s += latency;
                if (opts_.counters) {
                    opts_.counters->min_packet_latency_s =
                        std::min(opts_.counters->min_packet_latency_s, latency);
                    opts_.counters->max_packet_latency_s =
                        std::max(opts_.counters->max_packet_latency_s, latency);
                }
            }
        }
        compact_packets();
    }

    void lose_chain(const Chain& c) {
        tallies_.lost_bits += static_cast<double>(c.tb_bits);
        for (const Segment& s : c.segments) {
            Packet& p = packet(s.packet_id);
            p.bits_unresolved -= s.bits;
            if (!p.dead) {
                p.dead = true;
                ++tallies_.packets_lost;
                // The rest of the packet is pointless; drop what is still queued.
                if (p.bits_to_queue > 0) {
                    tallies_.lost_bits += static_cast<double>(p.bits_to_queue);
                    p.bits_unresolved -= p.bits_to_queue;
                    queued_bits_ -= p.bits_to_queue;
                    p.bits_to_queue = 0;
                }
            }
        }
        compact_packets();
    }

    void compact_packets() {
        while (!packets_.empty() && packets_.front().bits_unresolved == 0 &&
               packets_.front().bits_to_queue == 0) {
            packets_.pop_front();
            ++first_packet_id_;
        }
    }

    void check_conservation() const {
        double unresolved = 0.0;
        for (const Packet& p : packets_) unresolved += static_cast<double>(p.bits_unresolved);
        double balance = tallies_.delivered_bits + tallies_.lost_bits + unresolved;
        if (std::abs(balance - tallies_.offered_bits) > 1e-6 * std::max(1.0, tallies_.offered_bits)) {
            throw std::logic_error("bit conservation violated");
        }
    }

    void finalize() {
        tallies_.duration_s = cfg_.sim.duration_s;
        double unresolved = 0.0;
        for (const Packet& p : packets_) unresolved += static_cast<double>(p.bits_unresolved);
        tallies_.inflight_bits = unresolved;
    }

    void write_audit(std::int64_t tick, const std::vector<GnbSnapshot>& snapshots,
                     const std::vector<ScoreCard>& cards, const ClusterAssignment& assignment) {
        std::uint64_t digest = 0xCBF29CE484222325ULL;
        for (const GnbSnapshot& s : snapshots) {
            digest = fnv1a(digest, static_cast<std::uint64_t>(s.id()));
            digest = fnv1a(digest, static_cast<std::uint64_t>(s.available_rbs));
            digest = fnv1a(digest, static_cast<std::uint64_t>(s.numerology().mu()));
            for (int v : s.history.values()) digest = fnv1a(digest, static_cast<std::uint64_t>(v));
        }
        char digest_hex[17];
        std::snprintf(digest_hex, sizeof(digest_hex), "%016llx",
                      static_cast<unsigned long long>(digest));

        nlohmann::json line;
        line["t_s"] = static_cast<double>(tick) * tick_s_;
        line["policy"] = policy_.name();
        line["inputs_digest"] = digest_hex;
        line["members"] = nlohmann::json::array();
        for (const ClusterMember& m : assignment.members) {
            line["members"].push_back({{"gnb", m.gnb_id},
                                       {"mcs", m.mcs},
                                       {"cf", m.participation},
                                       {"alrb", m.allocated_rbs},
                                       {"clamped", m.clamped},
                                       {"est_bler", m.est_bler},
                                       {"max_es_rate_bps", m.max_es_rate_bps}});
        }
        line["flags"] = {{"rate_met", assignment.rate_met},
                         {"rate_coverable", assignment.rate_coverable},
                         {"constraints_relaxed", assignment.constraints_relaxed}};
        line["total_es_rate_bps"] = assignment.total_es_rate_bps;
        if (!cards.empty()) {
            line["cards"] = nlohmann::json::array();
            for (const ScoreCard& c : cards) {
                line["cards"].push_back({{"gnb", c.gnb_id},
                                         {"max_es_rate_bps", c.max_es_rate_bps},
                                         {"best_mcs", c.best_mcs},
                                         {"es_se", c.es_se},
                                         {"rate_score", c.rate_score},
                                         {"rel_score", c.rel_score},
                                         {"lat_score", c.lat_score},
                                         {"se_score", c.se_score},
                                         {"overall", c.overall},
                                         {"lat_feasible", c.lat_feasible},
                                         {"rel_feasible", c.rel_feasible}});
            }
        }
        (*opts_.audit) << line.dump() << "\n";
    }

    const ScenarioConfig& cfg_;
    const Policy& policy_;
    EngineOptions opts_;
    McsTable table_;
    LinkBlerParams link_;

    Random phy_rng_;
    Random mobility_rng_;
    Random background_rng_;
    Random measure_rng_;
    Random init_rng_;
    BackgroundLoad background_;

    double tick_s_ = 0.0;
    std::int64_t total_ticks_ = 0;
    std::int64_t epoch_ticks_ = 0;
    std::int64_t background_ticks_ = 0;
    int packet_bits_ = 0;
    double offered_bps_ = 0.0;

    MobilityState ue_;
    std::vector<GnbRuntime> gnbs_;

    std::deque<Packet> packets_;
    std::int64_t first_packet_id_ = 0;
    std::deque<std::int64_t> queue_;
    std::int64_t queued_bits_ = 0;
    double credit_bits_ = 0.0;

    MetricsTallies tallies_;
};

}  // namespace

RunMetrics run_scenario(const ScenarioConfig& cfg, const Policy& policy, std::uint64_t seed,
                        const EngineOptions& opts) {
    cfg.validate();
    SlotEngine engine(cfg, policy, seed, opts);
    return engine.run();
}

}  // namespace mcsim
