#pragma once

#include <memory>

#include "mcsim/bler.hpp"
#include "mcsim/channel.hpp"

namespace mcsim {

// Live per-gNB state at one decision epoch.
struct GnbSnapshot {
    const GnbProfile* profile = nullptr;
    int available_rbs = 0;
    CqiHistory history{1};

    int id() const { return profile->id; }
    Numerology numerology() const { return profile->numerology; }
    int power_level() const { return profile->power_level; }
};

// Per-gNB, per-MCS BLER provider consumed by the selection policies.
class BlerSource {
public:
    virtual ~BlerSource() = default;
    virtual double bler(const GnbSnapshot& snapshot, int mcs) const = 0;

    // One full MCS row (indices 1..27 into a 28-slot buffer).
    virtual void fill_row(const GnbSnapshot& snapshot, std::span<double, 28> row) const {
        for (int mcs = 1; mcs < 28; ++mcs) {
            row[static_cast<std::size_t>(mcs)] = bler(snapshot, mcs);
        }
    }
};

// The trained pipeline: warm histories go through cluster label + regressor;
// cold gNBs fall back to the link curve evaluated at the latest CQI's
// representative SNR.
class LearnedBlerEstimator final : public BlerSource {
public:
    LearnedBlerEstimator(CqiClusterModel model, BlerRegressor regressor, LinkBlerParams link,
                         ChannelParams channel);

    double bler(const GnbSnapshot& snapshot, int mcs) const override;
    void fill_row(const GnbSnapshot& snapshot, std::span<double, 28> row) const override;

    const CqiClusterModel& cluster_model() const { return model_; }
    const BlerRegressor& regressor() const { return regressor_; }

private:
    // The regressor input space is small and discrete; the table is filled
    // once so the estimator is immutable and cheap to share across runs.
    double cached(int label, int mu, int power, int mcs) const;

    CqiClusterModel model_;
    BlerRegressor regressor_;
    LinkBlerParams link_;
    ChannelParams channel_;
    std::vector<double> table_;
};

// Link-curve source driven by the latest CQI alone. Lets the baseline
// policies run without trained artifacts.
class CqiLinkBlerSource final : public BlerSource {
public:
    CqiLinkBlerSource(LinkBlerParams link, ChannelParams channel)
        : link_(link), channel_(channel) {}

    double bler(const GnbSnapshot& snapshot, int mcs) const override;

private:
    LinkBlerParams link_;
    ChannelParams channel_;
};

}  // namespace mcsim
