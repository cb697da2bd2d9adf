#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcsim/channel.hpp"
#include "mcsim/common.hpp"
#include "mcsim/radio.hpp"

namespace mcsim {

// Logistic link-level decode model. Stands in for an external link
// simulator: it is the ground truth the estimator is trained against and
// the failure law the slot engine draws from.
struct LinkBlerParams {
    std::array<double, kMcsCount> snr50_db{};  // per-MCS 50% decode point; [0] unused
    double slope_per_db = 1.0;
    double mu_penalty_db = 0.5;  // extra SNR needed per numerology step

    static LinkBlerParams defaults();
    void validate() const;
};

double link_bler(double snr_db, int mcs, Numerology num, const LinkBlerParams& params);

struct TrainingRow {
    std::vector<int> cqi_seq;  // length CHL, oldest first
    int mu = 0;
    int power_level = 0;
    int mcs = 1;
    double bler = 0.0;  // empirical over slots_per_row trials
};

struct SweepConfig {
    std::vector<int> mu_values;
    std::vector<int> power_levels = {0, 1, 2};
    int mcs_min = kMinMcs;
    int mcs_max = kMaxMcs;
    int positions_per_combo = 10;
    int slots_per_row = 200;
    // Training links are drawn within service range of a gNB of the swept
    // numerology so the dataset spans the full BLER transition instead of
    // being dominated by deep outage.
    double link_range_macro_m = 750.0;
    double link_range_small_m = 120.0;
    int chl = 20;
    bool fading = true;
};

struct TrainingContext {
    std::vector<GnbProfile> gnbs;
    ChannelParams channel;
    LinkBlerParams link;
};

std::vector<TrainingRow> generate_training_set(const TrainingContext& ctx,
                                               const SweepConfig& sweep, std::uint64_t seed);

std::string training_set_to_csv(std::span<const TrainingRow> rows);
std::vector<TrainingRow> training_set_from_csv(const std::string& csv_text);

// K-means centroids over CQI sequences; cluster ids label the sequences.
struct CqiClusterModel {
    int chl = 0;
    std::vector<std::vector<double>> centroids;

    int n_clusters() const { return static_cast<int>(centroids.size()); }

    std::string to_json_text() const;
    static CqiClusterModel from_json_text(const std::string& text);
};

struct KmeansReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> inertia_history;
    std::vector<int> assignment;  // nearest-centroid label of each input sequence
};

// Lloyd iterations with k-means++ seeding. Converges when no centroid moves
// more than 1e-6, capped at 300 iterations.
CqiClusterModel kmeans_fit(const std::vector<std::vector<double>>& sequences, int n_clusters,
                           std::uint64_t seed, KmeansReport* report = nullptr);

int nearest_centroid(const CqiClusterModel& model, std::span<const double> seq);

// Labels a warm CQI history; ties resolve to the lowest cluster id.
int cqi_label(const CqiClusterModel& model, const CqiHistory& hist);

struct RegressorTrainConfig;
struct RegressorReport;

// Feed-forward BLER regressor: one-hot cluster label plus scaled
// (numerology, power level, MCS), two tanh hidden layers, sigmoid output.
class BlerRegressor {
public:
    BlerRegressor() = default;
    BlerRegressor(int n_clusters, int hidden, std::uint64_t seed);

    bool trained() const { return trained_; }
    int n_clusters() const { return n_clusters_; }
    int input_dim() const { return n_clusters_ + 3; }

    double predict(int label, Numerology num, int power_level, int mcs) const;

    std::string to_json_text() const;
    static BlerRegressor from_json_text(const std::string& text);

private:
    friend struct RegressorTrainer;
    friend BlerRegressor train_regressor(std::span<const TrainingRow> rows,
                                         const CqiClusterModel& labels,
                                         const RegressorTrainConfig& cfg, std::uint64_t seed,
                                         RegressorReport* report);

    std::vector<double> encode(int label, int mu, int power_level, int mcs) const;
    double forward(std::span<const double> input) const;

    struct Layer {
        int in = 0, out = 0;
        std::vector<double> w;  // row-major out x in
        std::vector<double> b;
    };

    int n_clusters_ = 0;
    int hidden_ = 0;
    bool trained_ = false;
    std::array<Layer, 3> layers_;
};

struct RegressorTrainConfig {
    int max_epochs = 50;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double train_fraction = 0.7;
    int hidden = 64;
    int min_rows = 500;
};

struct RegressorReport {
    int train_rows = 0;
    int test_rows = 0;
    double test_mae = 0.0;
    double test_within_005 = 0.0;  // fraction of test rows with |error| <= 0.05
    std::vector<double> epoch_train_loss;
};

// Minimizes MSE against the empirical BLER with Adam over shuffled
// mini-batches; rows are split train/test before training.
BlerRegressor train_regressor(std::span<const TrainingRow> rows, const CqiClusterModel& labels,
                              const RegressorTrainConfig& cfg, std::uint64_t seed,
                              RegressorReport* report = nullptr);

double estimate_bler(const BlerRegressor& reg, int label, Numerology num, int power_level,
                     int mcs);

}  // namespace mcsim
