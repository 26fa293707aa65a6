#include "sarstv/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sarstv/error.hpp"

namespace sarstv {

LabelMap ClassificationMap::as_label_map() const {
    LabelMap m = LabelMap::from_labels(height, width, labels);
    m.num_classes = std::max(m.num_classes, classes);
    return m;
}

ClassificationMap argmax_map(const ProbabilityTensor& u) {
    ClassificationMap map;
    map.height = u.height();
    map.width = u.width();
    map.classes = u.classes();
    map.labels.resize(static_cast<std::size_t>(map.height) * map.width);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            int best = 0;
            for (int k = 1; k < u.classes(); ++k) {
                if (u.at(r, c, k) > u.at(r, c, best)) best = k;
            }
            map.labels[static_cast<std::size_t>(r) * map.width + c] = best + 1;
        }
    }
    return map;
}

MetricsReport metrics_from_confusion(std::vector<std::size_t> confusion, int classes) {
    if (classes < 1 || confusion.size() != static_cast<std::size_t>(classes) * classes) {
        throw InvalidArgument("confusion matrix must be K x K");
    }
    MetricsReport m;
    m.classes = classes;
    m.confusion = std::move(confusion);
    m.evaluated = std::accumulate(m.confusion.begin(), m.confusion.end(), std::size_t{0});
    if (m.evaluated == 0) throw InvalidArgument("empty evaluation set");

    const double n = static_cast<double>(m.evaluated);
    std::size_t diag = 0;
    std::vector<double> row_sum(classes, 0.0), col_sum(classes, 0.0);
    for (int t = 0; t < classes; ++t) {
        for (int p = 0; p < classes; ++p) {
            const double v = static_cast<double>(m.confusion[static_cast<std::size_t>(t) * classes + p]);
            row_sum[t] += v;
            col_sum[p] += v;
        }
        diag += m.confusion[static_cast<std::size_t>(t) * classes + t];
    }
    m.oa = static_cast<double>(diag) / n;

    m.per_class.assign(classes, std::numeric_limits<double>::quiet_NaN());
    double recall_sum = 0.0;
    int present = 0;
    for (int t = 0; t < classes; ++t) {
        if (row_sum[t] > 0) {
            m.per_class[t] = static_cast<double>(m.confusion[static_cast<std::size_t>(t) * classes + t]) / row_sum[t];
            recall_sum += m.per_class[t];
            ++present;
        }
    }
    m.aa = recall_sum / present;

    double pe = 0.0;
    for (int k = 0; k < classes; ++k) pe += row_sum[k] * col_sum[k];
    pe /= n * n;
    m.kappa = 1.0 - pe > 1e-15 ? (m.oa - pe) / (1.0 - pe) : (m.oa == 1.0 ? 1.0 : 0.0);
    return m;
}

MetricsReport evaluate(const ClassificationMap& map, const LabelMap& truth, const TrainingSet* exclude) {
    if (map.height != truth.height || map.width != truth.width) {
        throw InvalidArgument("classification map and ground truth differ in size");
    }
    const int k = std::max(truth.num_classes, map.classes);
    std::vector<unsigned char> skip;
    if (exclude) skip = exclude->mask(truth.height, truth.width);

    std::vector<std::size_t> confusion(static_cast<std::size_t>(k) * k, 0);
    for (std::size_t i = 0; i < truth.labels.size(); ++i) {
        const int t = truth.labels[i];
        if (t == 0 || (exclude && skip[i])) continue;
        const int p = map.labels[i];
        if (p < 1 || p > k) throw InvalidArgument("predicted class out of range: " + std::to_string(p));
        ++confusion[static_cast<std::size_t>(t - 1) * k + (p - 1)];
    }
    return metrics_from_confusion(std::move(confusion), k);
}

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    std::size_t n = 0;
    for (double x : xs) {
        if (std::isnan(x)) continue;
        out.mean += x;
        ++n;
    }
    if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    out.mean /= static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double x : xs) {
            if (!std::isnan(x)) ss += (x - out.mean) * (x - out.mean);
        }
        out.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return out;
}

}  // namespace

AggregateMetrics aggregate(const std::vector<MetricsReport>& reports) {
    AggregateMetrics agg;
    agg.trials = static_cast<int>(reports.size());
    if (reports.empty()) return agg;
    std::vector<double> oa, aa, kappa;
    for (const auto& r : reports) {
        oa.push_back(r.oa);
        aa.push_back(r.aa);
        kappa.push_back(r.kappa);
    }
    agg.oa = mean_std(oa);
    agg.aa = mean_std(aa);
    agg.kappa = mean_std(kappa);
    const int k = reports.front().classes;
    for (int c = 0; c < k; ++c) {
        std::vector<double> xs;
        for (const auto& r : reports) xs.push_back(r.per_class[c]);
        agg.per_class.push_back(mean_std(xs));
    }
    return agg;
}

std::size_t Heatmap::mass() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (mask[i]) total += static_cast<std::size_t>(counts[i]);
    }
    return total;
}

}  // namespace sarstv
