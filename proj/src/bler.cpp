#include "mcsim/bler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mcsim {

LinkBlerParams LinkBlerParams::defaults() {
    LinkBlerParams p;
    // 50% decode points spaced 1.1 dB apart from -4 dB (MCS 1) to 24.6 dB
    // (MCS 27). Calibration values, not measurements.
    for (int m = kMinMcs; m <= kMaxMcs; ++m) {
        p.snr50_db[static_cast<std::size_t>(m)] = -4.0 + 1.1 * (m - 1);
    }
    p.snr50_db[0] = -std::numeric_limits<double>::infinity();
    return p;
}

void LinkBlerParams::validate() const {
    if (!(slope_per_db > 0.0)) {
        throw std::invalid_argument("link BLER slope must be > 0");
    }
    for (int m = kMinMcs + 1; m <= kMaxMcs; ++m) {
        if (!(snr50_db[static_cast<std::size_t>(m)] > snr50_db[static_cast<std::size_t>(m - 1)])) {
            throw std::invalid_argument("snr50 must be strictly increasing in MCS");
        }
    }
}

double link_bler(double snr_db, int mcs, Numerology num, const LinkBlerParams& params) {
    if (mcs < kMinMcs || mcs > kMaxMcs) {
        throw std::invalid_argument("link_bler MCS must be in 1..27");
    }
    double threshold = params.snr50_db[static_cast<std::size_t>(mcs)] +
                       params.mu_penalty_db * num.mu();
    double margin = params.slope_per_db * (snr_db - threshold);
    return 1.0 / (1.0 + std::exp(margin));
}

std::vector<TrainingRow> generate_training_set(const TrainingContext& ctx,
                                               const SweepConfig& sweep, std::uint64_t seed) {
    if (sweep.mu_values.empty() || sweep.power_levels.empty() ||
        sweep.positions_per_combo < 1 || sweep.mcs_min > sweep.mcs_max) {
        throw std::invalid_argument("training sweep is empty");
    }
    if (sweep.slots_per_row < 1) {
        throw std::invalid_argument("slots_per_row must be >= 1");
    }
    ctx.link.validate();

    Random rng(seed);
    std::vector<TrainingRow> rows;
    rows.reserve(sweep.mu_values.size() * sweep.power_levels.size() *
                 static_cast<std::size_t>(sweep.mcs_max - sweep.mcs_min + 1) *
                 static_cast<std::size_t>(sweep.positions_per_combo));

    for (int mu : sweep.mu_values) {
        std::vector<const GnbProfile*> candidates;
        for (const GnbProfile& g : ctx.gnbs) {
            if (g.numerology.mu() == mu) candidates.push_back(&g);
        }
        if (candidates.empty()) {
            throw std::invalid_argument("sweep numerology " + std::to_string(mu) +
                                        " has no gNB in the scenario");
        }
        for (int power : sweep.power_levels) {
            for (int mcs = sweep.mcs_min; mcs <= sweep.mcs_max; ++mcs) {
                for (int p = 0; p < sweep.positions_per_combo; ++p) {
                    const GnbProfile& gnb =
                        *candidates[static_cast<std::size_t>(rng.uniform_int(
                            0, static_cast<int>(candidates.size()) - 1))];
                    double range = gnb.carrier_class == CarrierClass::Macro
                                       ? sweep.link_range_macro_m
                                       : sweep.link_range_small_m;
                    double d = rng.uniform(1.0, range);
                    double angle = rng.uniform(0.0, 2.0 * M_PI);
                    Position ue{gnb.position.x + d * std::cos(angle),
                                gnb.position.y + d * std::sin(angle)};
                    double shadow =
                        rng.normal(0.0, ctx.channel.shadow_sigma_db(gnb.carrier_class));
                    double pl = path_loss_db(gnb, ue, shadow, ctx.channel);
                    double mean_snr = snr_db(gnb, pl, power, ctx.channel);

                    TrainingRow row;
                    row.mu = mu;
                    row.power_level = power;
                    row.mcs = mcs;
                    row.cqi_seq.reserve(static_cast<std::size_t>(sweep.chl));
                    for (int i = 0; i < sweep.chl; ++i) {
                        double s = mean_snr + (sweep.fading ? fading_db(rng, ctx.channel.fading_diversity) : 0.0);
                        row.cqi_seq.push_back(snr_to_cqi(s, ctx.channel));
                    }
                    int fails = 0;
                    Numerology num(mu);
                    for (int s = 0; s < sweep.slots_per_row; ++s) {
                        double snr = mean_snr + (sweep.fading ? fading_db(rng, ctx.channel.fading_diversity) : 0.0);
                        if (rng.bernoulli(link_bler(snr, mcs, num, ctx.link))) ++fails;
                    }
                    row.bler = static_cast<double>(fails) / sweep.slots_per_row;
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

std::string training_set_to_csv(std::span<const TrainingRow> rows) {
    if (rows.empty()) {
        throw std::invalid_argument("cannot serialize an empty training set");
    }
    std::ostringstream out;
    int chl = static_cast<int>(rows.front().cqi_seq.size());
    for (int i = 0; i < chl; ++i) {
        out << "cqi_" << i << ",";
    }
    out << "mu,power_level,mcs,bler\n";
    char buf[64];
    for (const TrainingRow& r : rows) {
        for (int v : r.cqi_seq) out << v << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.bler);
        out << r.mu << "," << r.power_level << "," << r.mcs << "," << buf << "\n";
    }
    return out.str();
}

std::vector<TrainingRow> training_set_from_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("empty training set CSV");
    }
    int columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    int chl = columns - 4;
    if (chl < 1) {
        throw std::invalid_argument("training set CSV header malformed");
    }
    std::vector<TrainingRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        TrainingRow r;
        for (int i = 0; i < chl; ++i) {
            std::getline(ls, cell, ',');
            r.cqi_seq.push_back(std::stoi(cell));
        }
        std::getline(ls, cell, ',');
        r.mu = std::stoi(cell);
        std::getline(ls, cell, ',');
        r.power_level = std::stoi(cell);
        std::getline(ls, cell, ',');
        r.mcs = std::stoi(cell);
        std::getline(ls, cell, ',');
        r.bler = std::stod(cell);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// k-means

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

int nearest_index(const std::vector<std::vector<double>>& centroids,
                  std::span<const double> seq, double* dist_out = nullptr) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
        double d = sq_distance(centroids[static_cast<std::size_t>(c)], seq);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (dist_out) *dist_out = best_d;
    return best;
}

}  // namespace

CqiClusterModel kmeans_fit(const std::vector<std::vector<double>>& sequences, int n_clusters,
                           std::uint64_t seed, KmeansReport* report) {
    if (n_clusters < 2) {
        throw std::invalid_argument("n_clusters must be >= 2");
    }
    if (sequences.empty()) {
        throw std::invalid_argument("no sequences to cluster");
    }
    const std::size_t n = sequences.size();
    const std::size_t dim = sequences.front().size();
    for (const auto& s : sequences) {
        if (s.size() != dim) {
            throw std::invalid_argument("sequences must share one length");
        }
    }
    {
        std::set<std::vector<double>> distinct(sequences.begin(), sequences.end());
        if (static_cast<int>(distinct.size()) < n_clusters) {
            throw std::invalid_argument("need at least n_clusters distinct sequences");
        }
    }

    Random rng(seed);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(n_clusters));

    // k-means++ seeding: D^2-weighted draws.
    centroids.push_back(sequences[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(n) - 1))]);
    std::vector<double> d2(n, 0.0);
    while (static_cast<int>(centroids.size()) < n_clusters) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = sq_distance(centroids.back(), sequences[i]);
            if (centroids.size() == 1 || d < d2[i]) d2[i] = d;
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double r = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
            if (d2[pick] == 0.0) {  // landed on a duplicate; take the farthest point
                pick = static_cast<std::size_t>(
                    std::max_element(d2.begin(), d2.end()) - d2.begin());
            }
        }
        centroids.push_back(sequences[pick]);
    }

    constexpr int kMaxIterations = 300;
    constexpr double kShiftEps = 1e-6;
    std::vector<int> assignment(n, 0);
    std::vector<double> inertia_history;
    bool converged = false;
    int iterations = 0;

    for (int it = 0; it < kMaxIterations; ++it) {
        ++iterations;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d;
            assignment[i] = nearest_index(centroids, sequences[i], &d);
            inertia += d;
        }
        inertia_history.push_back(inertia);

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(n_clusters),
                                              std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<std::size_t>(n_clusters), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = static_cast<std::size_t>(assignment[i]);
            ++counts[c];
            for (std::size_t k = 0; k < dim; ++k) sums[c][k] += sequences[i][k];
        }
        // Re-seed empty clusters at the point farthest from its centroid.
        for (int c = 0; c < n_clusters; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            double worst = -1.0;
            std::size_t worst_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assignment[i])] <= 1) continue;
                double d = sq_distance(centroids[static_cast<std::size_t>(assignment[i])],
                                       sequences[i]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            auto old_c = static_cast<std::size_t>(assignment[worst_i]);
            --counts[old_c];
            for (std::size_t k = 0; k < dim; ++k) sums[old_c][k] -= sequences[worst_i][k];
            assignment[worst_i] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            sums[static_cast<std::size_t>(c)] = sequences[worst_i];
        }

        double max_shift = 0.0;
        for (int c = 0; c < n_clusters; ++c) {
            auto ci = static_cast<std::size_t>(c);
            std::vector<double> updated(dim);
            for (std::size_t k = 0; k < dim; ++k) {
                updated[k] = sums[ci][k] / counts[ci];
            }
            max_shift = std::max(max_shift, std::sqrt(sq_distance(centroids[ci], updated)));
            centroids[ci] = std::move(updated);
        }
        if (max_shift < kShiftEps) {
            converged = true;
            break;
        }
    }

    CqiClusterModel model;
    model.chl = static_cast<int>(dim);
    model.centroids = std::move(centroids);

    // Final pass so the reported assignment matches the returned centroids.
    for (std::size_t i = 0; i < n; ++i) {
        assignment[i] = nearest_centroid(model, sequences[i]);
    }
    if (report) {
        report->iterations = iterations;
        report->converged = converged;
        report->inertia_history = std::move(inertia_history);
        report->assignment = std::move(assignment);
    }
    return model;
}

int nearest_centroid(const CqiClusterModel& model, std::span<const double> seq) {
    if (model.centroids.empty()) {
        throw NotReadyError("cluster model has no centroids");
    }
    if (static_cast<int>(seq.size()) != model.chl) {
        throw std::invalid_argument("sequence length does not match the cluster model");
    }
    // nearest_index scans in id order and keeps the first minimum, which is
    // exactly the lowest-label tie rule.
    return nearest_index(model.centroids, seq);
}

int cqi_label(const CqiClusterModel& model, const CqiHistory& hist) {
    if (!hist.warm()) {
        throw NotReadyError("CQI history is not warm");
    }
    std::vector<double> seq = hist.as_vector();
    return nearest_centroid(model, seq);
}

std::string CqiClusterModel::to_json_text() const {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "cqi_cluster_model";
    doc["chl"] = chl;
    doc["centroids"] = centroids;
    return doc.dump(2);
}

CqiClusterModel CqiClusterModel::from_json_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("kind").get<std::string>() != "cqi_cluster_model") {
        throw ConfigError("not a cqi_cluster_model document");
    }
    CqiClusterModel m;
    m.chl = doc.at("chl").get<int>();
    m.centroids = doc.at("centroids").get<std::vector<std::vector<double>>>();
    return m;
}

// ---------------------------------------------------------------------------
// regressor

BlerRegressor::BlerRegressor(int n_clusters, int hidden, std::uint64_t seed)
    : n_clusters_(n_clusters), hidden_(hidden) {
    if (n_clusters < 1 || hidden < 1) {
        throw std::invalid_argument("regressor sizes must be >= 1");
    }
    Random rng(seed);
    auto init = [&rng](Layer& layer, int in, int out) {
        layer.in = in;
        layer.out = out;
        layer.w.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
        layer.b.assign(static_cast<std::size_t>(out), 0.0);
        double limit = std::sqrt(6.0 / (in + out));
        for (double& w : layer.w) w = rng.uniform(-limit, limit);
    };
    init(layers_[0], input_dim(), hidden);
    init(layers_[1], hidden, hidden);
    init(layers_[2], hidden, 1);
}

std::vector<double> BlerRegressor::encode(int label, int mu, int power_level, int mcs) const {
    std::vector<double> x(static_cast<std::size_t>(input_dim()), 0.0);
    if (label >= 0 && label < n_clusters_) {
        x[static_cast<std::size_t>(label)] = 1.0;
    }
    x[static_cast<std::size_t>(n_clusters_) + 0] = mu / 3.0;
    x[static_cast<std::size_t>(n_clusters_) + 1] = power_level / 2.0;
    x[static_cast<std::size_t>(n_clusters_) + 2] = (mcs - 1) / 26.0;
    return x;
}

double BlerRegressor::forward(std::span<const double> input) const {
    std::vector<double> a(input.begin(), input.end());
    for (int l = 0; l < 3; ++l) {
        const Layer& layer = layers_[static_cast<std::size_t>(l)];
        std::vector<double> z(static_cast<std::size_t>(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            double s = layer.b[static_cast<std::size_t>(o)];
            const double* wrow = &layer.w[static_cast<std::size_t>(o) *
                                          static_cast<std::size_t>(layer.in)];
            for (int i = 0; i < layer.in; ++i) s += wrow[i] * a[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(o)] = (l < 2) ? std::tanh(s) : 1.0 / (1.0 + std::exp(-s));
        }
        a = std::move(z);
    }
    return a[0];
}

double BlerRegressor::predict(int label, Numerology num, int power_level, int mcs) const {
    if (!trained_) {
        throw NotReadyError("BLER regressor has not been trained");
    }
    return forward(encode(label, num.mu(), power_level, mcs));
}

std::string BlerRegressor::to_json_text() const {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "bler_regressor";
    doc["n_clusters"] = n_clusters_;
    doc["hidden"] = hidden_;
    doc["trained"] = trained_;
    doc["layers"] = nlohmann::json::array();
    for (const Layer& l : layers_) {
        doc["layers"].push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
    }
    return doc.dump();
}

BlerRegressor BlerRegressor::from_json_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("kind").get<std::string>() != "bler_regressor") {
        throw ConfigError("not a bler_regressor document");
    }
    BlerRegressor reg;
    reg.n_clusters_ = doc.at("n_clusters").get<int>();
    reg.hidden_ = doc.at("hidden").get<int>();
    reg.trained_ = doc.at("trained").get<bool>();
    const auto& layers = doc.at("layers");
    if (layers.size() != 3) {
        throw ConfigError("bler_regressor must have exactly 3 layers");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        BlerRegressor::Layer& l = reg.layers_[i];
        l.in = layers[i].at("in").get<int>();
        l.out = layers[i].at("out").get<int>();
        l.w = layers[i].at("w").get<std::vector<double>>();
        l.b = layers[i].at("b").get<std::vector<double>>();
        if (l.w.size() != static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out) ||
            l.b.size() != static_cast<std::size_t>(l.out)) {
            throw ConfigError("bler_regressor layer shape mismatch");
        }
    }
    return reg;
}

struct RegressorTrainer {
    using Layer = BlerRegressor::Layer;

    struct AdamState {
        std::vector<double> mw, vw, mb, vb;
    };

    BlerRegressor& reg;
    std::array<AdamState, 3> adam;
    double lr;
    long step = 0;

    RegressorTrainer(BlerRegressor& r, double learning_rate) : reg(r), lr(learning_rate) {
        for (int l = 0; l < 3; ++l) {
            const Layer& layer = reg.layers_[static_cast<std::size_t>(l)];
            AdamState& s = adam[static_cast<std::size_t>(l)];
            s.mw.assign(layer.w.size(), 0.0);
            s.vw.assign(layer.w.size(), 0.0);
            s.mb.assign(layer.b.size(), 0.0);
            s.vb.assign(layer.b.size(), 0.0);
        }
    }

    // One Adam step on a mini-batch; returns the batch MSE.
    double train_batch(const std::vector<std::vector<double>>& xs,
                       const std::vector<double>& ys, std::span<const std::size_t> batch) {
        std::array<std::vector<double>, 3> gw;
        std::array<std::vector<double>, 3> gb;
        for (int l = 0; l < 3; ++l) {
            gw[static_cast<std::size_t>(l)].assign(reg.layers_[static_cast<std::size_t>(l)].w.size(), 0.0);
            gb[static_cast<std::size_t>(l)].assign(reg.layers_[static_cast<std::size_t>(l)].b.size(), 0.0);
        }
        double loss = 0.0;
        for (std::size_t idx : batch) {
            const std::vector<double>& x = xs[idx];
            double y = ys[idx];

            // Forward with stored activations.
            std::array<std::vector<double>, 4> act;
            act[0] = x;
            for (int l = 0; l < 3; ++l) {
                const Layer& layer = reg.layers_[static_cast<std::size_t>(l)];
                std::vector<double> z(static_cast<std::size_t>(layer.out));
                for (int o = 0; o < layer.out; ++o) {
                    double s = layer.b[static_cast<std::size_t>(o)];
                    const double* wrow = &layer.w[static_cast<std::size_t>(o) *
                                                  static_cast<std::size_t>(layer.in)];
                    const std::vector<double>& in = act[static_cast<std::size_t>(l)];
                    for (int i = 0; i < layer.in; ++i) s += wrow[i] * in[static_cast<std::size_t>(i)];
                    z[static_cast<std::size_t>(o)] =
                        (l < 2) ? std::tanh(s) : 1.0 / (1.0 + std::exp(-s));
                }
                act[static_cast<std::size_t>(l + 1)] = std::move(z);
            }
            double pred = act[3][0];
            double err = pred - y;
            loss += err * err;

            // Backward. Output: sigmoid + squared error.
            std::vector<double> delta{2.0 * err * pred * (1.0 - pred)};
            for (int l = 2; l >= 0; --l) {
                const Layer& layer = reg.layers_[static_cast<std::size_t>(l)];
                const std::vector<double>& in = act[static_cast<std::size_t>(l)];
                std::vector<double> prev_delta(static_cast<std::size_t>(layer.in), 0.0);
                for (int o = 0; o < layer.out; ++o) {
                    double d = delta[static_cast<std::size_t>(o)];
                    gb[static_cast<std::size_t>(l)][static_cast<std::size_t>(o)] += d;
                    const double* wrow = &layer.w[static_cast<std::size_t>(o) *
                                                  static_cast<std::size_t>(layer.in)];
                    double* grow = &gw[static_cast<std::size_t>(l)][static_cast<std::size_t>(o) *
                                                                    static_cast<std::size_t>(layer.in)];
                    for (int i = 0; i < layer.in; ++i) {
                        grow[i] += d * in[static_cast<std::size_t>(i)];
                        prev_delta[static_cast<std::size_t>(i)] += d * wrow[i];
                    }
                }
                if (l > 0) {
                    for (int i = 0; i < layer.in; ++i) {
                        double a = in[static_cast<std::size_t>(i)];
                        prev_delta[static_cast<std::size_t>(i)] *= (1.0 - a * a);  // tanh'
                    }
                    delta = std::move(prev_delta);
                }
            }
        }

        double inv_n = 1.0 / static_cast<double>(batch.size());
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++step;
        double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
        double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
        for (int l = 0; l < 3; ++l) {
            Layer& layer = reg.layers_[static_cast<std::size_t>(l)];
            AdamState& s = adam[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < layer.w.size(); ++i) {
                double g = gw[static_cast<std::size_t>(l)][i] * inv_n;
                s.mw[i] = b1 * s.mw[i] + (1.0 - b1) * g;
                s.vw[i] = b2 * s.vw[i] + (1.0 - b2) * g * g;
                layer.w[i] -= lr * (s.mw[i] / corr1) / (std::sqrt(s.vw[i] / corr2) + eps);
            }
            for (std::size_t i = 0; i < layer.b.size(); ++i) {
                double g = gb[static_cast<std::size_t>(l)][i] * inv_n;
                s.mb[i] = b1 * s.mb[i] + (1.0 - b1) * g;
                s.vb[i] = b2 * s.vb[i] + (1.0 - b2) * g * g;
                layer.b[i] -= lr * (s.mb[i] / corr1) / (std::sqrt(s.vb[i] / corr2) + eps);
            }
        }
        return loss * inv_n;
    }
};

namespace {

void fisher_yates(std::vector<std::size_t>& idx, Random& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

BlerRegressor train_regressor(std::span<const TrainingRow> rows, const CqiClusterModel& labels,
                              const RegressorTrainConfig& cfg, std::uint64_t seed,
                              RegressorReport* report) {
    if (static_cast<int>(rows.size()) < cfg.min_rows) {
        throw std::invalid_argument("need at least " + std::to_string(cfg.min_rows) +
                                    " rows to train the regressor");
    }

    Random rng(mix_seed(seed, 17));
    BlerRegressor reg(labels.n_clusters(), cfg.hidden, mix_seed(seed, 18));

    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    xs.reserve(rows.size());
    ys.reserve(rows.size());
    for (const TrainingRow& r : rows) {
        std::vector<double> seq(r.cqi_seq.begin(), r.cqi_seq.end());
        int label = nearest_centroid(labels, seq);
        xs.push_back(reg.encode(label, r.mu, r.power_level, r.mcs));
        ys.push_back(r.bler);
    }

    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    fisher_yates(idx, rng);
    auto n_train = static_cast<std::size_t>(
        std::llround(cfg.train_fraction * static_cast<double>(rows.size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), rows.size() - 1);
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());

    RegressorTrainer trainer(reg, cfg.learning_rate);
    std::vector<double> epoch_loss;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        fisher_yates(train_idx, rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(train_idx.size(),
                                       start + static_cast<std::size_t>(cfg.batch_size));
            loss_sum += trainer.train_batch(
                xs, ys, std::span<const std::size_t>(train_idx.data() + start, end - start));
            ++batches;
        }
        epoch_loss.push_back(loss_sum / static_cast<double>(batches));
    }
    reg.trained_ = true;

    if (report) {
        double abs_sum = 0.0;
        int within = 0;
        for (std::size_t i : test_idx) {
            double pred = reg.forward(xs[i]);
            double err = std::abs(pred - ys[i]);
            abs_sum += err;
            if (err <= 0.05) ++within;
        }
        report->train_rows = static_cast<int>(train_idx.size());
        report->test_rows = static_cast<int>(test_idx.size());
        report->test_mae = abs_sum / static_cast<double>(test_idx.size());
        report->test_within_005 = static_cast<double>(within) / static_cast<double>(test_idx.size());
        report->epoch_train_loss = std::move(epoch_loss);
    }
    return reg;
}

double estimate_bler(const BlerRegressor& reg, int label, Numerology num, int power_level,
                     int mcs) {
    double p = reg.predict(label, num, power_level, mcs);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace mcsim
