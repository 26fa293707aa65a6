#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sarstv/config.hpp"
#include "sarstv/cube.hpp"
#include "sarstv/metrics.hpp"
#include "sarstv/reduce.hpp"
#include "sarstv/regions.hpp"
#include "sarstv/svm.hpp"

namespace sarstv {

struct Dataset {
    std::string name;
    HsiCube cube;
    LabelMap labels;
};

/// Loads cube + labels and checks that they share a grid.
Dataset load_dataset(const DatasetConfig& cfg);

/// Features fed to the SVM: the (optionally reconstructed) cube after the
/// optional PCA step.
struct FeatureStage {
    Cube features;
    std::optional<PcaModel> pca;
    std::optional<RegionMap> regions;   ///< set when SaR ran
    std::size_t reconstruct_failures = 0;
    std::uint64_t key = 0;
};

/// SVM output for one training draw.
struct ProbabilityStage {
    ProbabilityTensor v;
    SvmParams selected;
    double cv_accuracy = 0.0;
    std::uint64_t key = 0;
    std::uint64_t v_hash = 0;  ///< content hash of v
};

struct ClassifyOutput {
    ClassificationMap map;
    ProbabilityTensor u;
    std::shared_ptr<const ProbabilityStage> probabilities;
    TrainingSet training;
    int stv_unconverged_channels = 0;
};

struct TrialsReport {
    std::vector<MetricsReport> trials;
    std::vector<ClassificationMap> maps;
    std::vector<SvmParams> selected;
    AggregateMetrics summary;
    Heatmap heatmap;
};

struct BetaTuning {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double best_score = 0.0;
    /// (beta1, beta2, mean OA+AA+Kappa) per grid point, beta1-major.
    std::vector<std::array<double, 3>> scores;
    /// Hash of V for each trial, recorded at every grid point; all entries
    /// of one trial are identical when the cache is doing its job.
    std::vector<std::vector<std::uint64_t>> v_hashes;
};

/// Runs the staged classifier on one dataset. Label-independent features
/// (SaR + PCA) and per-draw probability tensors are cached by content key,
/// so ablations and smoothing sweeps over the same data reuse them.
/// Thread-safe: trials may call classify() concurrently.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg);
    Pipeline(PipelineConfig cfg, Dataset data);

    const PipelineConfig& config() const { return cfg_; }
    const Dataset& dataset() const { return data_; }

    std::shared_ptr<const FeatureStage> features(Method method);
    std::shared_ptr<const ProbabilityStage> probabilities(Method method, const TrainingSet& training);

    /// One full run with training labels drawn from `seed`; method and
    /// smoothing settings default to the config.
    ClassifyOutput classify(std::uint64_t seed, int trial = 0);
    ClassifyOutput classify(std::uint64_t seed, int trial, Method method, const std::optional<StvParams>& stv);

    /// Trials use seeds seed + 0 .. seed + trials - 1.
    TrialsReport run_trials();
    TrialsReport run_trials(Method method, int per_class, int trials);

    /// Grid search of the smoothing weights on cached probability tensors.
    /// Ties go to the smaller beta2, then the smaller beta1.
    BetaTuning tune_betas(const std::vector<double>& beta1_grid, const std::vector<double>& beta2_grid);

    /// Training set of one trial.
    TrainingSet training_set(std::uint64_t seed, int per_class) const;

private:
    std::uint64_t feature_key(Method method) const;

    PipelineConfig cfg_;
    Dataset data_;
    std::uint64_t data_hash_ = 0;

    std::mutex mutex_;
    std::map<std::uint64_t, std::shared_ptr<const FeatureStage>> feature_cache_;
    std::map<std::uint64_t, std::shared_ptr<const ProbabilityStage>> probability_cache_;
    std::map<std::uint64_t, std::shared_ptr<std::mutex>> key_locks_;

    std::shared_ptr<std::mutex> lock_for(std::uint64_t key);
};

/// Convenience wrappers over a fresh Pipeline.
ClassifyOutput classify(const PipelineConfig& cfg, std::uint64_t seed);
TrialsReport run_trials(const PipelineConfig& cfg);

/// Deterministic metrics document (no timings, fixed key order).
std::string metrics_to_json(const PipelineConfig& cfg, const TrialsReport& report);
std::string metrics_to_json(const MetricsReport& report);

}  // namespace sarstv
