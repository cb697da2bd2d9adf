#include "mcsim/training.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace mcsim {

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<double>> sequences_of(std::span<const TrainingRow> rows) {
    std::vector<std::vector<double>> seqs;
    seqs.reserve(rows.size());
    for (const TrainingRow& r : rows) {
        seqs.emplace_back(r.cqi_seq.begin(), r.cqi_seq.end());
    }
    return seqs;
}

void shuffle_indices(std::vector<std::size_t>& idx, Random& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(idx[i - 1], idx[j]);
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotReadyError("missing artifact: " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ClassifierEval evaluate_classifier(const std::vector<std::vector<double>>& sequences,
                                   int n_clusters, double train_fraction, std::uint64_t seed) {
    KmeansReport km;
    CqiClusterModel full = kmeans_fit(sequences, n_clusters, mix_seed(seed, 100), &km);

    std::vector<std::size_t> idx(sequences.size());
    std::iota(idx.begin(), idx.end(), 0);
    Random rng(mix_seed(seed, 101));
    shuffle_indices(idx, rng);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(sequences.size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), sequences.size() - 1);

    // Classifier training: per-label centroid re-estimation on the train split.
    std::size_t dim = sequences.front().size();
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(n_clusters),
                                          std::vector<double>(dim, 0.0));
    std::vector<int> counts(static_cast<std::size_t>(n_clusters), 0);
    for (std::size_t i = 0; i < n_train; ++i) {
        std::size_t row = idx[i];
        auto label = static_cast<std::size_t>(km.assignment[row]);
        ++counts[label];
        for (std::size_t k = 0; k < dim; ++k) sums[label][k] += sequences[row][k];
    }
    CqiClusterModel classifier;
    classifier.chl = static_cast<int>(dim);
    classifier.centroids.resize(static_cast<std::size_t>(n_clusters));
    for (int c = 0; c < n_clusters; ++c) {
        auto ci = static_cast<std::size_t>(c);
        if (counts[ci] > 0) {
            classifier.centroids[ci].resize(dim);
            for (std::size_t k = 0; k < dim; ++k) {
                classifier.centroids[ci][k] = sums[ci][k] / counts[ci];
            }
        } else {
            classifier.centroids[ci] = full.centroids[ci];
        }
    }

    ClassifierEval eval;
    eval.n_clusters = n_clusters;
    eval.confusion.assign(static_cast<std::size_t>(n_clusters),
                          std::vector<int>(static_cast<std::size_t>(n_clusters), 0));
    std::size_t correct = 0;
    std::size_t tested = 0;
    for (std::size_t i = n_train; i < idx.size(); ++i) {
        std::size_t row = idx[i];
        int truth = km.assignment[row];
        int pred = nearest_centroid(classifier, sequences[row]);
        ++eval.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
        if (pred == truth) ++correct;
        ++tested;
    }
    eval.accuracy = tested > 0 ? static_cast<double>(correct) / static_cast<double>(tested) : 0.0;
    return eval;
}

TrainedArtifacts train_pipeline(const ScenarioConfig& cfg, std::uint64_t seed,
                                std::vector<TrainingRow>* rows_out) {
    auto t0 = std::chrono::steady_clock::now();
    cfg.validate();

    std::vector<TrainingRow> rows =
        generate_training_set(cfg.training_context(), cfg.sweep_config(), mix_seed(seed, 200));
    std::vector<std::vector<double>> seqs = sequences_of(rows);

    TrainedArtifacts artifacts;
    artifacts.dataset_rows = static_cast<int>(rows.size());
    for (int c : cfg.train.cluster_counts) {
        artifacts.classifier_evals.push_back(
            evaluate_classifier(seqs, c, cfg.train.train_fraction, seed));
    }

    artifacts.cluster_model = kmeans_fit(seqs, cfg.train.n_clusters, mix_seed(seed, 300));

    RegressorTrainConfig rcfg;
    rcfg.max_epochs = cfg.train.epochs;
    rcfg.batch_size = cfg.train.batch_size;
    rcfg.learning_rate = cfg.train.learning_rate;
    rcfg.train_fraction = cfg.train.train_fraction;
    rcfg.hidden = cfg.train.hidden;
    artifacts.regressor = train_regressor(rows, artifacts.cluster_model, rcfg, mix_seed(seed, 400),
                                          &artifacts.regressor_report);

    artifacts.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rows_out) *rows_out = std::move(rows);
    return artifacts;
}

void save_artifacts(const std::string& dir, const TrainedArtifacts& artifacts,
                    const std::vector<TrainingRow>& rows) {
    fs::create_directories(dir);
    write_file(fs::path(dir) / "cluster_model.json", artifacts.cluster_model.to_json_text());
    write_file(fs::path(dir) / "regressor.json", artifacts.regressor.to_json_text());
    write_file(fs::path(dir) / "dataset.csv", training_set_to_csv(rows));

    // Wall-clock timing stays out of the persisted report so identical
    // seeds write byte-identical artifacts.
    nlohmann::json report;
    report["schema_version"] = 1;
    report["kind"] = "training_report";
    report["dataset_rows"] = artifacts.dataset_rows;
    report["regressor"] = {
        {"train_rows", artifacts.regressor_report.train_rows},
        {"test_rows", artifacts.regressor_report.test_rows},
        {"test_mae", artifacts.regressor_report.test_mae},
        {"test_within_0p05", artifacts.regressor_report.test_within_005},
    };
    report["classifier"] = nlohmann::json::array();
    for (const ClassifierEval& e : artifacts.classifier_evals) {
        report["classifier"].push_back(
            {{"n_clusters", e.n_clusters}, {"accuracy", e.accuracy}});

        std::ostringstream csv;
        for (std::size_t i = 0; i < e.confusion.size(); ++i) {
            for (std::size_t j = 0; j < e.confusion[i].size(); ++j) {
                if (j) csv << ",";
                csv << e.confusion[i][j];
            }
            csv << "\n";
        }
        write_file(fs::path(dir) / ("confusion_" + std::to_string(e.n_clusters) + ".csv"),
                   csv.str());
    }
    write_file(fs::path(dir) / "training_report.json", report.dump(2) + "\n");
}

LearnedBlerEstimator load_estimator(const std::string& dir, const ScenarioConfig& cfg) {
    CqiClusterModel model =
        CqiClusterModel::from_json_text(read_file(fs::path(dir) / "cluster_model.json"));
    BlerRegressor reg =
        BlerRegressor::from_json_text(read_file(fs::path(dir) / "regressor.json"));
    if (model.chl != cfg.selection.chl) {
        throw ConfigError("persisted cluster model CHL does not match the scenario");
    }
    return LearnedBlerEstimator(std::move(model), std::move(reg), cfg.link.to_params(),
                                cfg.channel);
}

}  // namespace mcsim
