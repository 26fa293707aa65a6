#pragma once

#include <cstdint>
#include <vector>

#include "sarstv/cube.hpp"

namespace sarstv {

/// Predicted class per pixel (1..K) plus where it came from.
struct ClassificationMap {
    int height = 0;
    int width = 0;
    int classes = 0;
    std::vector<int> labels;  // row-major

    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    int trial = 0;

    int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
    LabelMap as_label_map() const;
};

/// Per-pixel argmax over classes; ties go to the lowest class index.
ClassificationMap argmax_map(const ProbabilityTensor& u);

struct MetricsReport {
    int classes = 0;
    /// confusion[t * K + p]: pixels of true class t+1 predicted as p+1.
    std::vector<std::size_t> confusion;
    std::size_t evaluated = 0;
    double oa = 0.0;
    double aa = 0.0;
    double kappa = 0.0;
    /// Recall per class; NaN for classes with no evaluated pixels.
    std::vector<double> per_class;
};

MetricsReport metrics_from_confusion(std::vector<std::size_t> confusion, int classes);

/// Scores every labeled pixel of `truth`, minus the excluded training
/// pixels when `exclude` is given. Throws InvalidArgument on a shape
/// mismatch or an empty evaluation set.
MetricsReport evaluate(const ClassificationMap& map, const LabelMap& truth, const TrainingSet* exclude = nullptr);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation; 0 for one trial
};

struct AggregateMetrics {
    int trials = 0;
    MeanStd oa;
    MeanStd aa;
    MeanStd kappa;
    std::vector<MeanStd> per_class;
};

AggregateMetrics aggregate(const std::vector<MetricsReport>& reports);

/// Count of trials that misclassified each pixel. Pixels outside `mask`
/// (unlabeled ground truth) are not counted.
struct Heatmap {
    int height = 0;
    int width = 0;
    int trials = 0;
    std::vector<int> counts;           // row-major
    std::vector<unsigned char> mask;   // 1 = labeled

    std::size_t mass() const;
};

}  // namespace sarstv
