#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcsim/estimator.hpp"
#include "mcsim/scenario.hpp"

namespace mcsim {

struct ClassifierEval {
    int n_clusters = 0;
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true label][predicted label]
};

struct TrainedArtifacts {
    CqiClusterModel cluster_model;  // the runtime labeler
    BlerRegressor regressor;
    RegressorReport regressor_report;
    std::vector<ClassifierEval> classifier_evals;
    int dataset_rows = 0;
    double train_seconds = 0.0;
};

// Dataset generation, clustering, classifier evaluation and regressor
// training in one deterministic pass.
//
// Labels come from a full k-means fit. The classifier evaluation mirrors a
// train/test protocol: per-label centroids are re-estimated from the
// training split and the held-out split is scored against the full-fit
// labels, once per configured cluster count.
TrainedArtifacts train_pipeline(const ScenarioConfig& cfg, std::uint64_t seed,
                                std::vector<TrainingRow>* rows_out = nullptr);

ClassifierEval evaluate_classifier(const std::vector<std::vector<double>>& sequences,
                                   int n_clusters, double train_fraction, std::uint64_t seed);

void save_artifacts(const std::string& dir, const TrainedArtifacts& artifacts,
                    const std::vector<TrainingRow>& rows);

// Loads the persisted models; throws NotReadyError when they are absent.
LearnedBlerEstimator load_estimator(const std::string& dir, const ScenarioConfig& cfg);

}  // namespace mcsim
