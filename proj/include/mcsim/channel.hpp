#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "mcsim/common.hpp"
#include "mcsim/radio.hpp"

namespace mcsim {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

double distance_m(const Position& a, const Position& b);

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(const Position& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

struct MobilityState {
    Position position;
    Position waypoint;
    double speed_mps = 0.0;
};

enum class CarrierClass { Macro, Small };

struct GnbProfile {
    int id = 0;
    Position position;
    Numerology numerology{0};
    CarrierClass carrier_class = CarrierClass::Macro;
    double max_power_dbm = 49.0;
    int power_level = 0;  // 0 = max, 1 = max-3 dB, 2 = max-6 dB
    int total_rbs = kDefaultRbsPerGnb;
    double carrier_ghz = 3.5;

    double tx_power_dbm(int level) const;
    double total_bandwidth_hz() const;
};

struct ChannelParams {
    double pl_exp_macro = 2.8;
    double pl_exp_small = 3.2;
    double shadow_sigma_macro_db = 4.0;
    double shadow_sigma_small_db = 7.0;
    double decorrelation_m = 25.0;
    double noise_figure_db = 7.0;
    double cqi_floor_db = -6.0;  // lower edge of CQI bin 1..; below it CQI = 0
    double cqi_step_db = 2.0;
    bool per_slot_fading = true;
    int fading_diversity = 8;  // 1 = plain Rayleigh

    double pl0_db(double carrier_ghz) const;
    double pl_exponent(CarrierClass c) const {
        return c == CarrierClass::Macro ? pl_exp_macro : pl_exp_small;
    }
    double shadow_sigma_db(CarrierClass c) const {
        return c == CarrierClass::Macro ? shadow_sigma_macro_db : shadow_sigma_small_db;
    }
};

// Log-distance path loss with the caller-supplied shadowing term.
// Distance is clamped below at 1 m.
double path_loss_db(const GnbProfile& gnb, const Position& ue, double shadowing_db,
                    const ChannelParams& params);

double noise_floor_dbm(double occupied_hz, const ChannelParams& params);

// Wideband SNR over the gNB's full carrier at the given power level.
double snr_db(const GnbProfile& gnb, double path_loss_db, int power_level,
              const ChannelParams& params);

// Quantizes SNR onto the 16-step CQI scale.
int snr_to_cqi(double snr_db, const ChannelParams& params);

// Representative SNR for a CQI value (bin midpoint; edge bins use the
// adjacent bin width).
double cqi_to_snr_db(int cqi, const ChannelParams& params);

// Fixed-capacity ring of the most recent CQI reports for one gNB.
// The history is "warm" only once it holds exactly chl entries; consumers
// that need a full sequence must check warm() first.
class CqiHistory {
public:
    explicit CqiHistory(int chl);

    void push(int cqi);
    bool warm() const { return static_cast<int>(values_.size()) == chl_; }
    int size() const { return static_cast<int>(values_.size()); }
    int chl() const { return chl_; }
    int latest() const;  // most recent entry; throws NotReadyError when empty
    const std::deque<int>& values() const { return values_; }
    std::vector<double> as_vector() const;  // oldest first

private:
    int chl_;
    std::deque<int> values_;
};

// Random-waypoint step: move toward the waypoint at speed*dt; on arrival
// land exactly on it and draw a fresh waypoint and speed.
MobilityState step_mobility(const MobilityState& state, double dt_s, const Rect& region,
                            std::pair<double, double> speed_range_mps, Random& rng);

MobilityState random_mobility_state(const Rect& region, std::pair<double, double> speed_range_mps,
                                    Random& rng);

// Gudmundson-style shadowing: exponentially correlated over traveled
// distance, stationary N(0, sigma).
class ShadowingProcess {
public:
    ShadowingProcess(double sigma_db, double decorrelation_m, Random& rng);

    double value_db() const { return value_db_; }
    void advance(double moved_m, Random& rng);

private:
    double sigma_db_;
    double decorrelation_m_;
    double value_db_;
};

}  // namespace mcsim
