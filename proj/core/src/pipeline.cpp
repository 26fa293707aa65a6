#include "sarstv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "sarstv/error.hpp"
#include "sarstv/hash.hpp"
#include "sarstv/io.hpp"
#include "sarstv/parallel.hpp"
#include "sarstv/random.hpp"
#include "sarstv/reconstruct.hpp"
#include "sarstv/stv.hpp"

namespace sarstv {

namespace {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::uint64_t hash_cube(const Cube& c) {
    Fnv1a h;
    h.value(c.height()).value(c.width()).value(c.bands());
    h.values(std::span<const double>(c.values()));
    return h.digest();
}

}  // namespace

Dataset load_dataset(const DatasetConfig& cfg) {
    return in_stage("io", [&] {
        Dataset d;
        d.name = cfg.name;
        d.cube = load_cube(cfg.cube);
        d.labels = load_labels(cfg.labels);
        check_same_grid(d.labels, d.cube);
        return d;
    });
}

Pipeline::Pipeline(PipelineConfig cfg) : Pipeline(cfg, load_dataset(cfg.dataset)) {}

Pipeline::Pipeline(PipelineConfig cfg, Dataset data) : cfg_(std::move(cfg)), data_(std::move(data)) {
    cfg_.validate(false);
    check_same_grid(data_.labels, data_.cube);
    data_.cube.check_finite();
    if (data_.labels.num_classes < 2) throw InvalidArgument("ground truth must contain at least two classes");
    Fnv1a h;
    h.value(hash_cube(data_.cube));
    h.values(std::span<const int>(data_.labels.labels));
    data_hash_ = h.digest();
}

std::shared_ptr<std::mutex> Pipeline::lock_for(std::uint64_t key) {
    std::lock_guard guard(mutex_);
    auto& m = key_locks_[key];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

std::uint64_t Pipeline::feature_key(Method method) const {
    Fnv1a h;
    h.value(data_hash_);
    h.value(uses_sar(method));
    if (uses_sar(method)) {
        h.values(std::span<const int>(cfg_.sar.scales));
        h.value(cfg_.sar.gamma);
        h.value(cfg_.sar.noise_sigma.value_or(-1.0));
    }
    h.value(cfg_.pca.enabled);
    h.value(cfg_.pca.variance_fraction);
    return h.digest();
}

std::shared_ptr<const FeatureStage> Pipeline::features(Method method) {
    const std::uint64_t key = feature_key(method);
    {
        std::lock_guard guard(mutex_);
        if (auto it = feature_cache_.find(key); it != feature_cache_.end()) return it->second;
    }
    auto key_lock = lock_for(key);
    std::lock_guard compute(*key_lock);
    {
        std::lock_guard guard(mutex_);
        if (auto it = feature_cache_.find(key); it != feature_cache_.end()) return it->second;
    }

    auto stage = std::make_shared<FeatureStage>();
    stage->key = key;
    const Cube* source = &data_.cube;
    Cube reconstructed;
    if (uses_sar(method)) {
        in_stage("sar", [&] {
            const GuideImage guide = first_principal_component(data_.cube);
            stage->regions = compute_regions(guide, cfg_.sar);
            auto rec = reconstruct_cube(data_.cube, *stage->regions);
            stage->reconstruct_failures = rec.diagnostics.size();
            reconstructed = std::move(rec.cube);
            return 0;
        });
        source = &reconstructed;
    }
    if (cfg_.pca.enabled) {
        in_stage("pca", [&] {
            stage->pca = fit_pca(*source, cfg_.pca.variance_fraction);
            stage->features = pca_transform(*stage->pca, *source);
            return 0;
        });
    } else {
        stage->features = *source;
    }

    std::lock_guard guard(mutex_);
    feature_cache_[key] = stage;
    return stage;
}

TrainingSet Pipeline::training_set(std::uint64_t seed, int per_class) const {
    return in_stage("sample", [&] { return sample_training_set(data_.labels, per_class, seed); });
}

std::shared_ptr<const ProbabilityStage> Pipeline::probabilities(Method method, const TrainingSet& training) {
    const auto feats = features(method);
    Fnv1a h;
    h.value(feats->key);
    for (const auto& s : training.samples) h.value(s.row).value(s.col).value(s.cls);
    h.value(training.seed);
    h.values(std::span<const double>(cfg_.svm.grid.nu));
    h.values(std::span<const double>(cfg_.svm.grid.gamma));
    h.value(cfg_.svm.folds).value(cfg_.svm.tol).value(cfg_.svm.max_iter);
    const std::uint64_t key = h.digest();
    {
        std::lock_guard guard(mutex_);
        if (auto it = probability_cache_.find(key); it != probability_cache_.end()) return it->second;
    }
    auto key_lock = lock_for(key);
    std::lock_guard compute(*key_lock);
    {
        std::lock_guard guard(mutex_);
        if (auto it = probability_cache_.find(key); it != probability_cache_.end()) return it->second;
    }

    auto stage = std::make_shared<ProbabilityStage>();
    stage->key = key;
    in_stage("svm", [&] {
        const Cube& f = feats->features;
        SampleMatrix x(static_cast<Eigen::Index>(training.size()), f.bands());
        std::vector<int> y(training.size());
        for (std::size_t i = 0; i < training.size(); ++i) {
            const auto& s = training.samples[i];
            for (int b = 0; b < f.bands(); ++b) x(static_cast<Eigen::Index>(i), b) = f.at(s.row, s.col, b);
            y[i] = s.cls;
        }
        SvmParams params;
        params.tol = cfg_.svm.tol;
        params.max_iter = cfg_.svm.max_iter;
        params.cache_mb = cfg_.svm.cache_mb;
        params.nu = cfg_.svm.grid.nu.front();
        params.gamma = cfg_.svm.grid.gamma.front();
        const int classes = data_.labels.num_classes;
        if (cfg_.svm.grid.nu.size() * cfg_.svm.grid.gamma.size() > 1) {
            const Standardizer scaler = Standardizer::fit(x);
            const auto cv = cross_validate(scaler.apply(x), y, classes, cfg_.svm.grid, cfg_.svm.folds,
                                           derive_seed(training.seed, 1), params);
            params = cv.best;
            stage->cv_accuracy = cv.best_accuracy;
        }
        params.probability = true;
        params.seed = derive_seed(training.seed, 2);
        const SvmClassifier clf = train_classifier(x, y, classes, params);
        stage->selected = params;
        stage->v = predict_prob_tensor(clf, f);
        return 0;
    });
    stage->v_hash = hash_cube(stage->v.data);

    std::lock_guard guard(mutex_);
    probability_cache_[key] = stage;
    return stage;
}

ClassifyOutput Pipeline::classify(std::uint64_t seed, int trial) {
    return classify(seed, trial, cfg_.method, cfg_.stv);
}

ClassifyOutput Pipeline::classify(std::uint64_t seed, int trial, Method method, const std::optional<StvParams>& stv) {
    ClassifyOutput out;
    out.training = training_set(seed, cfg_.per_class);
    out.probabilities = probabilities(method, out.training);
    if (uses_stv(method)) {
        if (!stv) throw StageError("stv", "method " + to_string(method) + " needs smoothing parameters");
        const auto smoothed = in_stage("stv", [&] {
            const FixedMask mask = FixedMask::from_training(out.training, data_.cube.height(), data_.cube.width());
            return stv_denoise_tensor(out.probabilities->v, *stv, mask);
        });
        out.u = smoothed.u;
        out.stv_unconverged_channels = smoothed.unconverged_channels;
    } else {
        out.u = out.probabilities->v;
    }
    out.map = argmax_map(out.u);
    PipelineConfig effective = cfg_;
    effective.method = method;
    effective.stv = stv;
    out.map.config_hash = config_hash(effective);
    out.map.seed = seed;
    out.map.trial = trial;
    return out;
}

TrialsReport Pipeline::run_trials() {
    return run_trials(cfg_.method, cfg_.per_class, cfg_.trials);
}

TrialsReport Pipeline::run_trials(Method method, int per_class, int trials) {
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    const int saved_per_class = cfg_.per_class;
    cfg_.per_class = per_class;
    features(method);  // computed once with the full thread budget

    TrialsReport report;
    report.trials.resize(trials);
    report.maps.resize(trials);
    report.selected.resize(trials);
    std::vector<std::vector<unsigned char>> missed(trials);
    try {
        parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
            try {
                const auto out = classify(cfg_.seed + t, static_cast<int>(t), method, cfg_.stv);
                const TrainingSet* exclude = cfg_.evaluation == EvalMode::exclude_training ? &out.training : nullptr;
                report.trials[t] = evaluate(out.map, data_.labels, exclude);
                report.selected[t] = out.probabilities->selected;

                auto& miss = missed[t];
                miss.assign(data_.labels.labels.size(), 0);
                const auto skip = out.training.mask(data_.labels.height, data_.labels.width);
                for (std::size_t i = 0; i < miss.size(); ++i) {
                    const int truth = data_.labels.labels[i];
                    if (truth == 0 || (exclude && skip[i])) continue;
                    miss[i] = out.map.labels[i] != truth;
                }
                report.maps[t] = out.map;
            } catch (const std::exception& e) {
                throw Error("trial " + std::to_string(t) + ": " + e.what());
            }
        });
    } catch (...) {
        cfg_.per_class = saved_per_class;
        throw;
    }
    cfg_.per_class = saved_per_class;

    report.summary = aggregate(report.trials);
    auto& hm = report.heatmap;
    hm.height = data_.labels.height;
    hm.width = data_.labels.width;
    hm.trials = trials;
    hm.counts.assign(data_.labels.labels.size(), 0);
    hm.mask.assign(data_.labels.labels.size(), 0);
    for (std::size_t i = 0; i < hm.mask.size(); ++i) hm.mask[i] = data_.labels.labels[i] > 0;
    for (const auto& miss : missed) {
        for (std::size_t i = 0; i < miss.size(); ++i) hm.counts[i] += miss[i];
    }
    return report;
}

BetaTuning Pipeline::tune_betas(const std::vector<double>& beta1_grid, const std::vector<double>& beta2_grid) {
    if (beta1_grid.empty() || beta2_grid.empty()) throw InvalidArgument("tune_betas: empty beta grid");
    const Method method = cfg_.method == Method::svm ? Method::svm_stv : cfg_.method;
    const StvParams base = cfg_.stv.value_or(stv_preset(data_.name).value_or(StvParams{}));
    features(method);

    const std::size_t points = beta1_grid.size() * beta2_grid.size();
    std::vector<double> score_sum(points, 0.0);
    BetaTuning result;
    result.v_hashes.assign(cfg_.trials, std::vector<std::uint64_t>(points, 0));
    for (int t = 0; t < cfg_.trials; ++t) {
        const TrainingSet training = training_set(cfg_.seed + t, cfg_.per_class);
        const TrainingSet* exclude = cfg_.evaluation == EvalMode::exclude_training ? &training : nullptr;
        const FixedMask mask = FixedMask::from_training(training, data_.cube.height(), data_.cube.width());
        probabilities(method, training);
        parallel_for(points, [&](std::size_t g) {
            const auto prob = probabilities(method, training);
            result.v_hashes[t][g] = prob->v_hash;
            StvParams p = base;
            p.beta1 = beta1_grid[g / beta2_grid.size()];
            p.beta2 = beta2_grid[g % beta2_grid.size()];
            p.rho.reset();
            const auto u = in_stage("stv", [&] { return stv_denoise_tensor(prob->v, p, mask); });
            const auto m = evaluate(argmax_map(u.u), data_.labels, exclude);
            score_sum[g] += m.oa + m.aa + m.kappa;
        });
    }

    std::vector<std::size_t> order(points);
    for (std::size_t g = 0; g < points; ++g) order[g] = g;
    // Visit smaller beta2 first, then smaller beta1; only a strict gain moves the choice.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double a2 = beta2_grid[a % beta2_grid.size()], b2 = beta2_grid[b % beta2_grid.size()];
        if (a2 != b2) return a2 < b2;
        return beta1_grid[a / beta2_grid.size()] < beta1_grid[b / beta2_grid.size()];
    });
    result.best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t g : order) {
        const double s = score_sum[g] / cfg_.trials;
        if (s > result.best_score + 1e-12) {
            result.best_score = s;
            result.beta1 = beta1_grid[g / beta2_grid.size()];
            result.beta2 = beta2_grid[g % beta2_grid.size()];
        }
    }
    for (std::size_t g = 0; g < points; ++g) {
        result.scores.push_back({beta1_grid[g / beta2_grid.size()], beta2_grid[g % beta2_grid.size()],
                                 score_sum[g] / cfg_.trials});
    }
    return result;
}

ClassifyOutput classify(const PipelineConfig& cfg, std::uint64_t seed) {
    Pipeline p(cfg);
    return p.classify(seed);
}

TrialsReport run_trials(const PipelineConfig& cfg) {
    Pipeline p(cfg);
    return p.run_trials();
}

namespace {

nlohmann::json metrics_json(const MetricsReport& m) {
    nlohmann::json j;
    j["oa"] = m.oa;
    j["aa"] = m.aa;
    j["kappa"] = m.kappa;
    j["evaluated"] = m.evaluated;
    j["per_class"] = m.per_class;
    j["confusion"] = m.confusion;
    return j;
}

nlohmann::json mean_std_json(const MeanStd& m) {
    return {{"mean", m.mean}, {"std", m.std}};
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report) {
    return metrics_json(report).dump(2);
}

std::string metrics_to_json(const PipelineConfig& cfg, const TrialsReport& report) {
    nlohmann::json j;
    j["config_hash"] = config_hash(cfg);
    j["method"] = to_string(cfg.method);
    j["per_class"] = cfg.per_class;
    j["trials"] = report.summary.trials;
    j["summary"] = {{"oa", mean_std_json(report.summary.oa)},
                    {"aa", mean_std_json(report.summary.aa)},
                    {"kappa", mean_std_json(report.summary.kappa)}};
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& pc : report.summary.per_class) per_class.push_back(mean_std_json(pc));
    j["summary"]["per_class"] = per_class;
    nlohmann::json trials = nlohmann::json::array();
    for (std::size_t t = 0; t < report.trials.size(); ++t) {
        auto tj = metrics_json(report.trials[t]);
        tj["seed"] = report.maps[t].seed;
        tj["nu"] = report.selected[t].nu;
        tj["gamma"] = report.selected[t].gamma;
        trials.push_back(tj);
    }
    j["trial_metrics"] = trials;
    j["heatmap_mass"] = report.heatmap.mass();
    return j.dump(2);
}

}  // namespace sarstv
