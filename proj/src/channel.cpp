#include "mcsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcsim {

double distance_m(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double GnbProfile::tx_power_dbm(int level) const {
    if (level < 0 || level > 2) {
        throw std::invalid_argument("power level must be in {0,1,2}");
    }
    return max_power_dbm - 3.0 * level;
}

double GnbProfile::total_bandwidth_hz() const {
    return consumed_bandwidth_hz(total_rbs, numerology);
}

double ChannelParams::pl0_db(double carrier_ghz) const {
    return 32.4 + 20.0 * std::log10(carrier_ghz);
}

double path_loss_db(const GnbProfile& gnb, const Position& ue, double shadowing_db,
                    const ChannelParams& params) {
    double d = std::max(1.0, distance_m(gnb.position, ue));
    double n = params.pl_exponent(gnb.carrier_class);
    return params.pl0_db(gnb.carrier_ghz) + 10.0 * n * std::log10(d) + shadowing_db;
}

double noise_floor_dbm(double occupied_hz, const ChannelParams& params) {
    return -174.0 + 10.0 * std::log10(occupied_hz) + params.noise_figure_db;
}

double snr_db(const GnbProfile& gnb, double path_loss_db, int power_level,
              const ChannelParams& params) {
    double noise = noise_floor_dbm(gnb.total_bandwidth_hz(), params);
    return gnb.tx_power_dbm(power_level) - path_loss_db - noise;
}

int snr_to_cqi(double snr_db, const ChannelParams& params) {
    if (snr_db < params.cqi_floor_db) return 0;
    int cqi = static_cast<int>(std::floor((snr_db - params.cqi_floor_db) / params.cqi_step_db));
    return std::min(cqi, 15);
}

double cqi_to_snr_db(int cqi, const ChannelParams& params) {
    if (cqi < 0 || cqi > 15) {
        throw std::invalid_argument("CQI must be in 0..15");
    }
    double lower = params.cqi_floor_db + cqi * params.cqi_step_db;
    if (cqi == 0) {
        return params.cqi_floor_db - params.cqi_step_db / 2.0;
    }
    return lower + params.cqi_step_db / 2.0;
}

CqiHistory::CqiHistory(int chl) : chl_(chl) {
    if (chl < 1) {
        throw std::invalid_argument("CQI history length must be >= 1");
    }
}

void CqiHistory::push(int cqi) {
    if (cqi < 0 || cqi > 15) {
        throw std::invalid_argument("CQI must be in 0..15");
    }
    values_.push_back(cqi);
    if (static_cast<int>(values_.size()) > chl_) {
        values_.pop_front();
    }
}

int CqiHistory::latest() const {
    if (values_.empty()) {
        throw NotReadyError("CQI history is empty");
    }
    return values_.back();
}

std::vector<double> CqiHistory::as_vector() const {
    return std::vector<double>(values_.begin(), values_.end());
}

MobilityState step_mobility(const MobilityState& state, double dt_s, const Rect& region,
                            std::pair<double, double> speed_range_mps, Random& rng) {
    if (!(dt_s > 0.0)) {
        throw std::invalid_argument("mobility step requires dt > 0");
    }
    MobilityState next = state;
    double budget = state.speed_mps * dt_s;
    double dx = state.waypoint.x - state.position.x;
    double dy = state.waypoint.y - state.position.y;
    double dist = std::hypot(dx, dy);
    if (dist <= budget || dist == 0.0) {
        next.position = state.waypoint;
        next.waypoint = {rng.uniform(region.x0, region.x1), rng.uniform(region.y0, region.y1)};
        next.speed_mps = rng.uniform(speed_range_mps.first, speed_range_mps.second);
    } else {
        next.position.x += dx / dist * budget;
        next.position.y += dy / dist * budget;
    }
    return next;
}

MobilityState random_mobility_state(const Rect& region, std::pair<double, double> speed_range_mps,
                                    Random& rng) {
    MobilityState s;
    s.position = {rng.uniform(region.x0, region.x1), rng.uniform(region.y0, region.y1)};
    s.waypoint = {rng.uniform(region.x0, region.x1), rng.uniform(region.y0, region.y1)};
    s.speed_mps = rng.uniform(speed_range_mps.first, speed_range_mps.second);
    return s;
}

ShadowingProcess::ShadowingProcess(double sigma_db, double decorrelation_m, Random& rng)
    : sigma_db_(sigma_db), decorrelation_m_(decorrelation_m), value_db_(rng.normal(0.0, sigma_db)) {}

void ShadowingProcess::advance(double moved_m, Random& rng) {
    if (moved_m <= 0.0) return;
    double rho = std::exp(-moved_m / decorrelation_m_);
    value_db_ = rho * value_db_ + std::sqrt(1.0 - rho * rho) * rng.normal(0.0, sigma_db_);
}

}  // namespace mcsim
