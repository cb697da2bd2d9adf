#include "mcsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mcsim {

using nlohmann::json;

LinkBlerParams LinkCurveConfig::to_params() const {
    LinkBlerParams p;
    for (int m = kMinMcs; m <= kMaxMcs; ++m) {
        p.snr50_db[static_cast<std::size_t>(m)] = snr50_mcs1_db + snr50_step_db * (m - 1);
    }
    p.snr50_db[0] = -std::numeric_limits<double>::infinity();
    p.slope_per_db = slope_per_db;
    p.mu_penalty_db = mu_penalty_db;
    return p;
}

ScenarioConfig ScenarioConfig::defaults() {
    ScenarioConfig cfg;

    auto add_gnb = [&cfg](int id, double x, double y, int mu, CarrierClass cls) {
        GnbProfile g;
        g.id = id;
        g.position = {x, y};
        g.numerology = Numerology(mu);
        g.carrier_class = cls;
        g.max_power_dbm = cls == CarrierClass::Macro ? 49.0 : 29.0;
        g.carrier_ghz = cls == CarrierClass::Macro ? 3.5 : 25.0;
        g.power_level = 0;
        g.total_rbs = kDefaultRbsPerGnb;
        cfg.gnbs.push_back(g);
    };

    const double cx = 500.0, cy = 500.0;
    add_gnb(0, cx, cy, 0, CarrierClass::Macro);
    const double ring_m = 30.0;
    for (int k = 0; k < 6; ++k) {
        double angle = k * M_PI / 3.0;
        add_gnb(1 + k, std::round((cx + ring_m * std::cos(angle)) * 1000.0) / 1000.0,
                std::round((cy + ring_m * std::sin(angle)) * 1000.0) / 1000.0, 3,
                CarrierClass::Small);
    }
    add_gnb(7, cx, cy + 60.0, 2, CarrierClass::Small);
    add_gnb(8, cx, cy - 60.0, 2, CarrierClass::Small);

    cfg.mobility.region = Rect{480.0, 480.0, 520.0, 520.0};
    // FR2 hotspot SNRs run well past the generic reporting range; widen the
    // CQI bins so the quantizer does not saturate where the cells operate.
    cfg.channel.cqi_step_db = 3.0;
    cfg.selection.epoch_s = 0.025;
    cfg.mobility.v_max_mps = 1.5;
    return cfg;
}

void ScenarioConfig::validate() const {
    if (!(area_m > 0.0)) throw ConfigError("area must be > 0");
    if (gnbs.empty()) throw ConfigError("scenario needs at least one gNB");
    std::set<int> ids;
    for (const GnbProfile& g : gnbs) {
        if (!ids.insert(g.id).second) throw ConfigError("duplicate gNB id");
        if (!area_rect().contains(g.position)) throw ConfigError("gNB outside the area");
        if (g.power_level < 0 || g.power_level > 2) throw ConfigError("power level out of range");
        if (g.total_rbs < 1) throw ConfigError("total_rbs must be >= 1");
        if (!(g.carrier_ghz > 0.0)) throw ConfigError("carrier frequency must be > 0");
    }
    qos.validate();
    link.to_params().validate();
    if (!(sim.duration_s > 0.0)) throw ConfigError("duration must be > 0");
    if (sim.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (!(selection.epoch_s > 0.0)) throw ConfigError("selection epoch must be > 0");
    if (selection.max_cluster_size < 1) throw ConfigError("max cluster size must be >= 1");
    if (selection.chl < 1) throw ConfigError("chl must be >= 1");
    if (!(selection.allocation_headroom >= 1.0)) {
        throw ConfigError("allocation headroom must be >= 1");
    }
    if (traffic.packet_bytes < 1) throw ConfigError("packet size must be >= 1 byte");
    if (traffic.offered_bps < 0.0) throw ConfigError("offered rate must be >= 0");
    if (background.occupied_min < 0 || background.occupied_max < background.occupied_min) {
        throw ConfigError("background occupancy bounds are inverted");
    }
    if (background.step_rbs < 0) throw ConfigError("background step must be >= 0");
    if (!(background.period_s > 0.0)) throw ConfigError("background period must be > 0");
    if (channel.fading_diversity < 1) throw ConfigError("fading diversity must be >= 1");
    for (const GnbProfile& g : gnbs) {
        if (background.occupied_max > g.total_rbs) {
            throw ConfigError("background occupancy exceeds a gNB's RBs");
        }
    }
    if (!(mobility.v_min_mps >= 0.0) || mobility.v_max_mps < mobility.v_min_mps) {
        throw ConfigError("mobility speed range is invalid");
    }
    if (mobility.region) {
        const Rect& r = *mobility.region;
        if (r.width() <= 0.0 || r.height() <= 0.0 ||
            !area_rect().contains({r.x0, r.y0}) || !area_rect().contains({r.x1, r.y1})) {
            throw ConfigError("mobility region must be a nonempty rectangle inside the area");
        }
    }
    if (train.positions_per_combo < 1 || train.slots_per_row < 1 || train.n_clusters < 2 ||
        train.epochs < 1 || train.batch_size < 1 || train.hidden < 1) {
        throw ConfigError("training profile values must be positive");
    }
    if (!(train.train_fraction > 0.0) || train.train_fraction >= 1.0) {
        throw ConfigError("train fraction must be in (0,1)");
    }
    if (mcs_table_json) {
        McsTable::from_json_text(*mcs_table_json);  // shape check
    }
}

void ScenarioConfig::apply_fast_profile() {
    sim.duration_s = 10.0;
}

McsTable ScenarioConfig::mcs_table() const {
    if (mcs_table_json) return McsTable::from_json_text(*mcs_table_json);
    return McsTable::default_table();
}

std::vector<int> ScenarioConfig::distinct_mus() const {
    std::set<int> mus;
    for (const GnbProfile& g : gnbs) mus.insert(g.numerology.mu());
    return std::vector<int>(mus.begin(), mus.end());
}

TrainingContext ScenarioConfig::training_context() const {
    return TrainingContext{gnbs, channel, link.to_params()};
}

SweepConfig ScenarioConfig::sweep_config() const {
    SweepConfig sweep;
    sweep.mu_values = distinct_mus();
    sweep.positions_per_combo = train.positions_per_combo;
    sweep.slots_per_row = train.slots_per_row;
    sweep.link_range_macro_m = train.link_range_macro_m;
    sweep.link_range_small_m = train.link_range_small_m;
    sweep.chl = selection.chl;
    sweep.fading = channel.per_slot_fading;
    return sweep;
}

namespace {

json rect_to_json(const Rect& r) {
    return json{{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}};
}

Rect rect_from_json(const json& j) {
    return Rect{j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("x1").get<double>(),
                j.at("y1").get<double>()};
}

}  // namespace

std::string ScenarioConfig::to_json_text() const {
    json doc;
    doc["schema_version"] = 1;
    doc["area_m"] = area_m;

    doc["gnbs"] = json::array();
    for (const GnbProfile& g : gnbs) {
        doc["gnbs"].push_back({
            {"id", g.id},
            {"x", g.position.x},
            {"y", g.position.y},
            {"mu", g.numerology.mu()},
            {"class", g.carrier_class == CarrierClass::Macro ? "macro" : "small"},
            {"max_power_dbm", g.max_power_dbm},
            {"power_level", g.power_level},
            {"total_rbs", g.total_rbs},
            {"carrier_ghz", g.carrier_ghz},
        });
    }

    doc["qos"] = {
        {"rate_req_bps", qos.rate_req_bps},
        {"rel_req", qos.rel_req},
        {"lat_req_s", qos.lat_req_s},
        {"weights",
         {{"rate", qos.weights.rate},
          {"reliability", qos.weights.reliability},
          {"latency", qos.weights.latency},
          {"spectrum_efficiency", qos.weights.spectrum_efficiency}}},
    };

    doc["channel"] = {
        {"pl_exp_macro", channel.pl_exp_macro},
        {"pl_exp_small", channel.pl_exp_small},
        {"shadow_sigma_macro_db", channel.shadow_sigma_macro_db},
        {"shadow_sigma_small_db", channel.shadow_sigma_small_db},
        {"decorrelation_m", channel.decorrelation_m},
        {"noise_figure_db", channel.noise_figure_db},
        {"cqi_floor_db", channel.cqi_floor_db},
        {"cqi_step_db", channel.cqi_step_db},
        {"per_slot_fading", channel.per_slot_fading},
        {"fading_diversity", channel.fading_diversity},
    };

    doc["link_curve"] = {
        {"snr50_mcs1_db", link.snr50_mcs1_db},
        {"snr50_step_db", link.snr50_step_db},
        {"slope_per_db", link.slope_per_db},
        {"mu_penalty_db", link.mu_penalty_db},
    };

    doc["traffic"] = {
        {"packet_bytes", traffic.packet_bytes},
        {"offered_bps", traffic.offered_bps},
    };

    doc["sim"] = {
        {"duration_s", sim.duration_s},
        {"repetitions", sim.repetitions},
        {"base_seed", sim.base_seed},
    };

    doc["selection"] = {
        {"epoch_s", selection.epoch_s},
        {"max_cluster_size", selection.max_cluster_size},
        {"chl", selection.chl},
        {"literal_rel_score", selection.literal_rel_score},
        {"allocation_headroom", selection.allocation_headroom},
    };

    doc["background"] = {
        {"period_s", background.period_s},
        {"step_rbs", background.step_rbs},
        {"occupied_min", background.occupied_min},
        {"occupied_max", background.occupied_max},
    };

    doc["mobility"] = {
        {"v_min_mps", mobility.v_min_mps},
        {"v_max_mps", mobility.v_max_mps},
    };
    if (mobility.region) {
        doc["mobility"]["region"] = rect_to_json(*mobility.region);
    }

    doc["train"] = {
        {"positions_per_combo", train.positions_per_combo},
        {"slots_per_row", train.slots_per_row},
        {"cluster_counts", train.cluster_counts},
        {"n_clusters", train.n_clusters},
        {"train_fraction", train.train_fraction},
        {"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"learning_rate", train.learning_rate},
        {"hidden", train.hidden},
        {"link_range_macro_m", train.link_range_macro_m},
        {"link_range_small_m", train.link_range_small_m},
    };

    if (mcs_table_json) {
        doc["mcs_table"] = json::parse(*mcs_table_json);
    }
    return doc.dump(2) + "\n";
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
    }
    ScenarioConfig cfg;
    cfg.gnbs.clear();
    try {
        cfg.area_m = doc.at("area_m").get<double>();
        for (const json& jg : doc.at("gnbs")) {
            GnbProfile g;
            g.id = jg.at("id").get<int>();
            g.position = {jg.at("x").get<double>(), jg.at("y").get<double>()};
            g.numerology = Numerology(jg.at("mu").get<int>());
            std::string cls = jg.at("class").get<std::string>();
            if (cls == "macro") {
                g.carrier_class = CarrierClass::Macro;
            } else if (cls == "small") {
                g.carrier_class = CarrierClass::Small;
            } else {
                throw ConfigError("gNB class must be 'macro' or 'small'");
            }
            g.max_power_dbm = jg.at("max_power_dbm").get<double>();
            g.power_level = jg.at("power_level").get<int>();
            g.total_rbs = jg.at("total_rbs").get<int>();
            g.carrier_ghz = jg.at("carrier_ghz").get<double>();
            cfg.gnbs.push_back(g);
        }

        const json& jq = doc.at("qos");
        cfg.qos.rate_req_bps = jq.at("rate_req_bps").get<double>();
        cfg.qos.rel_req = jq.at("rel_req").get<double>();
        cfg.qos.lat_req_s = jq.at("lat_req_s").get<double>();
        const json& jw = jq.at("weights");
        cfg.qos.weights.rate = jw.at("rate").get<double>();
        cfg.qos.weights.reliability = jw.at("reliability").get<double>();
        cfg.qos.weights.latency = jw.at("latency").get<double>();
        cfg.qos.weights.spectrum_efficiency = jw.at("spectrum_efficiency").get<double>();

        const json& jc = doc.at("channel");
        cfg.channel.pl_exp_macro = jc.at("pl_exp_macro").get<double>();
        cfg.channel.pl_exp_small = jc.at("pl_exp_small").get<double>();
        cfg.channel.shadow_sigma_macro_db = jc.at("shadow_sigma_macro_db").get<double>();
        cfg.channel.shadow_sigma_small_db = jc.at("shadow_sigma_small_db").get<double>();
        cfg.channel.decorrelation_m = jc.at("decorrelation_m").get<double>();
        cfg.channel.noise_figure_db = jc.at("noise_figure_db").get<double>();
        cfg.channel.cqi_floor_db = jc.at("cqi_floor_db").get<double>();
        cfg.channel.cqi_step_db = jc.at("cqi_step_db").get<double>();
        cfg.channel.per_slot_fading = jc.at("per_slot_fading").get<bool>();
        cfg.channel.fading_diversity = jc.at("fading_diversity").get<int>();

        const json& jl = doc.at("link_curve");
        cfg.link.snr50_mcs1_db = jl.at("snr50_mcs1_db").get<double>();
        cfg.link.snr50_step_db = jl.at("snr50_step_db").get<double>();
        cfg.link.slope_per_db = jl.at("slope_per_db").get<double>();
        cfg.link.mu_penalty_db = jl.at("mu_penalty_db").get<double>();

        const json& jt = doc.at("traffic");
        cfg.traffic.packet_bytes = jt.at("packet_bytes").get<int>();
        cfg.traffic.offered_bps = jt.at("offered_bps").get<double>();

        const json& js = doc.at("sim");
        cfg.sim.duration_s = js.at("duration_s").get<double>();
        cfg.sim.repetitions = js.at("repetitions").get<int>();
        cfg.sim.base_seed = js.at("base_seed").get<std::uint64_t>();

        const json& jsel = doc.at("selection");
        cfg.selection.epoch_s = jsel.at("epoch_s").get<double>();
        cfg.selection.max_cluster_size = jsel.at("max_cluster_size").get<int>();
        cfg.selection.chl = jsel.at("chl").get<int>();
        cfg.selection.literal_rel_score = jsel.at("literal_rel_score").get<bool>();
        cfg.selection.allocation_headroom = jsel.at("allocation_headroom").get<double>();

        const json& jb = doc.at("background");
        cfg.background.period_s = jb.at("period_s").get<double>();
        cfg.background.step_rbs = jb.at("step_rbs").get<int>();
        cfg.background.occupied_min = jb.at("occupied_min").get<int>();
        cfg.background.occupied_max = jb.at("occupied_max").get<int>();

        const json& jm = doc.at("mobility");
        cfg.mobility.v_min_mps = jm.at("v_min_mps").get<double>();
        cfg.mobility.v_max_mps = jm.at("v_max_mps").get<double>();
        if (jm.contains("region")) {
            cfg.mobility.region = rect_from_json(jm.at("region"));
        } else {
            cfg.mobility.region.reset();
        }

        const json& jtr = doc.at("train");
        cfg.train.positions_per_combo = jtr.at("positions_per_combo").get<int>();
        cfg.train.slots_per_row = jtr.at("slots_per_row").get<int>();
        cfg.train.cluster_counts = jtr.at("cluster_counts").get<std::vector<int>>();
        cfg.train.n_clusters = jtr.at("n_clusters").get<int>();
        cfg.train.train_fraction = jtr.at("train_fraction").get<double>();
        cfg.train.epochs = jtr.at("epochs").get<int>();
        cfg.train.batch_size = jtr.at("batch_size").get<int>();
        cfg.train.learning_rate = jtr.at("learning_rate").get<double>();
        cfg.train.hidden = jtr.at("hidden").get<int>();
        cfg.train.link_range_macro_m = jtr.at("link_range_macro_m").get<double>();
        cfg.train.link_range_small_m = jtr.at("link_range_small_m").get<double>();

        if (doc.contains("mcs_table")) {
            cfg.mcs_table_json = doc.at("mcs_table").dump();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario JSON field error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file: " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

}  // namespace mcsim
