#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcsim/bler.hpp"
#include "mcsim/channel.hpp"
#include "mcsim/selector.hpp"

namespace mcsim {

struct SimProfile {
    double duration_s = 600.0;
    int repetitions = 10;
    std::uint64_t base_seed = 1;
};

struct SelectionConfig {
    double epoch_s = 0.1;
    int max_cluster_size = 4;
    int chl = 20;
    bool literal_rel_score = false;
    double allocation_headroom = 1.25;
};

struct TrafficConfig {
    int packet_bytes = 1500;
    double offered_bps = 0.0;  // 0 means "track the rate requirement"
};

struct BackgroundConfig {
    double period_s = 0.1;
    int step_rbs = 5;
    int occupied_min = 0;
    int occupied_max = 40;
};

struct MobilityConfig {
    double v_min_mps = 0.5;
    double v_max_mps = 3.0;
    // Waypoints are drawn inside this sub-rectangle of the area (the
    // deployment's service zone); it defaults to the whole area.
    std::optional<Rect> region;
};

struct LinkCurveConfig {
    double snr50_mcs1_db = -4.0;
    double snr50_step_db = 1.1;
    double slope_per_db = 1.0;
    double mu_penalty_db = 0.5;

    LinkBlerParams to_params() const;
};

struct TrainProfile {
    int positions_per_combo = 10;
    int slots_per_row = 200;
    std::vector<int> cluster_counts = {20, 30, 40, 50};
    int n_clusters = 40;
    double train_fraction = 0.7;
    int epochs = 50;
    int batch_size = 128;
    double learning_rate = 1e-3;
    int hidden = 64;
    double link_range_macro_m = 750.0;
    double link_range_small_m = 120.0;
};

struct ScenarioConfig {
    double area_m = 1000.0;
    std::vector<GnbProfile> gnbs;
    QosRequirement qos;
    ChannelParams channel;
    LinkCurveConfig link;
    TrafficConfig traffic;
    SimProfile sim;
    SelectionConfig selection;
    BackgroundConfig background;
    MobilityConfig mobility;
    TrainProfile train;
    std::optional<std::string> mcs_table_json;  // inline override of the default table

    // Nine-gNB deployment: the macro at the center of the square with an
    // FR2 hotspot around it (six 120 kHz cells on a 22 m ring, two 60 kHz
    // cells north/south), UE roaming across the hotspot.
    static ScenarioConfig defaults();

    void validate() const;
    void apply_fast_profile();  // shrinks the run for CI-scale iterations

    Rect area_rect() const { return {0.0, 0.0, area_m, area_m}; }
    Rect mobility_region() const { return mobility.region.value_or(area_rect()); }
    double offered_bps() const {
        return traffic.offered_bps > 0.0 ? traffic.offered_bps : qos.rate_req_bps;
    }
    McsTable mcs_table() const;
    std::vector<int> distinct_mus() const;
    TrainingContext training_context() const;
    SweepConfig sweep_config() const;

    std::string to_json_text() const;
    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_json_file(const std::string& path);
};

}  // namespace mcsim
