#include "mcsim/estimator.hpp"

namespace mcsim {

LearnedBlerEstimator::LearnedBlerEstimator(CqiClusterModel model, BlerRegressor regressor,
                                           LinkBlerParams link, ChannelParams channel)
    : model_(std::move(model)),
      regressor_(std::move(regressor)),
      link_(link),
      channel_(channel) {
    if (!regressor_.trained()) {
        throw NotReadyError("LearnedBlerEstimator requires a trained regressor");
    }
    if (regressor_.n_clusters() != model_.n_clusters()) {
        throw ConfigError("cluster model and regressor disagree on n_clusters");
    }
    int n = model_.n_clusters();
    table_.resize(static_cast<std::size_t>(n) * 4 * 3 * kMaxMcs);
    for (int label = 0; label < n; ++label) {
        for (int mu = 0; mu <= 3; ++mu) {
            for (int power = 0; power <= 2; ++power) {
                for (int mcs = kMinMcs; mcs <= kMaxMcs; ++mcs) {
                    std::size_t idx =
                        ((static_cast<std::size_t>(label) * 4 + static_cast<std::size_t>(mu)) * 3 +
                         static_cast<std::size_t>(power)) *
                            kMaxMcs +
                        static_cast<std::size_t>(mcs - 1);
                    table_[idx] = estimate_bler(regressor_, label, Numerology(mu), power, mcs);
                }
            }
        }
    }
}

double LearnedBlerEstimator::cached(int label, int mu, int power, int mcs) const {
    std::size_t idx =
        ((static_cast<std::size_t>(label) * 4 + static_cast<std::size_t>(mu)) * 3 +
         static_cast<std::size_t>(power)) *
            kMaxMcs +
        static_cast<std::size_t>(mcs - 1);
    return table_[idx];
}

double LearnedBlerEstimator::bler(const GnbSnapshot& snapshot, int mcs) const {
    if (snapshot.history.warm()) {
        int label = cqi_label(model_, snapshot.history);
        return cached(label, snapshot.numerology().mu(), snapshot.power_level(), mcs);
    }
    // Cold start: score from the latest single CQI.
    int cqi = snapshot.history.size() > 0 ? snapshot.history.latest() : 0;
    double snr = cqi_to_snr_db(cqi, channel_);
    return link_bler(snr, mcs, snapshot.numerology(), link_);
}

void LearnedBlerEstimator::fill_row(const GnbSnapshot& snapshot, std::span<double, 28> row) const {
    if (!snapshot.history.warm()) {
        BlerSource::fill_row(snapshot, row);
        return;
    }
    int label = cqi_label(model_, snapshot.history);
    for (int mcs = kMinMcs; mcs <= kMaxMcs; ++mcs) {
        row[static_cast<std::size_t>(mcs)] =
            cached(label, snapshot.numerology().mu(), snapshot.power_level(), mcs);
    }
}

double CqiLinkBlerSource::bler(const GnbSnapshot& snapshot, int mcs) const {
    int cqi = snapshot.history.size() > 0 ? snapshot.history.latest() : 0;
    double snr = cqi_to_snr_db(cqi, channel_);
    return link_bler(snr, mcs, snapshot.numerology(), link_);
}

}  // namespace mcsim
