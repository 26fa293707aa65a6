// sarstv command-line front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sarstv/config.hpp"
#include "sarstv/error.hpp"
#include "sarstv/io.hpp"
#include "sarstv/metrics.hpp"
#include "sarstv/pipeline.hpp"
#include "sarstv/reconstruct.hpp"
#include "sarstv/reduce.hpp"
#include "sarstv/regions.hpp"
#include "sarstv/render.hpp"
#include "sarstv/stv.hpp"
#include "sarstv/svm.hpp"

namespace fs = std::filesystem;
using namespace sarstv;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text << '\n';
}

Cube map_to_cube(const ClassificationMap& map) {
    std::vector<double> v(map.labels.begin(), map.labels.end());
    return Cube(map.height, map.width, 1, std::move(v));
}

std::string map_header(const ClassificationMap& map) {
    nlohmann::json j{{"kind", "classification_map"},
                     {"classes", map.classes},
                     {"config_hash", map.config_hash},
                     {"seed", map.seed},
                     {"trial", map.trial}};
    return j.dump();
}

LabelMap read_map(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv" || ext == ".pgm") return load_labels(path);
    const Cube c = load_cube(path);
    if (c.bands() != 1) throw InvalidArgument("map cube must have one band");
    std::vector<int> labels(c.pixels());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(c.values()[i]);
    return LabelMap::from_labels(c.height(), c.width(), std::move(labels));
}

struct Overrides {
    std::string method;
    std::optional<int> per_class;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::string out;
};

PipelineConfig load_with_overrides(const std::string& path, const Overrides& o) {
    PipelineConfig cfg = load_config(path);
    if (!o.method.empty()) {
        cfg.method = parse_method(o.method);
        if (uses_stv(cfg.method) && !cfg.stv) cfg.stv = stv_preset(cfg.dataset.name).value_or(StvParams{});
    }
    if (o.per_class) cfg.per_class = *o.per_class;
    if (o.trials) cfg.trials = *o.trials;
    if (o.seed) cfg.seed = *o.seed;
    if (!o.out.empty()) cfg.out_dir = o.out;
    cfg.validate(true);
    return cfg;
}

void add_overrides(CLI::App* cmd, std::string& config, Overrides& o) {
    cmd->add_option("--config", config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--method", o.method, "svm | svm-stv | sar-svm-stv");
    cmd->add_option("--per-class", o.per_class, "training labels per class");
    cmd->add_option("--trials", o.trials, "number of trials");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--out", o.out, "output directory");
}

int run_classify(const std::string& config_path, const Overrides& o, bool dump_regions) {
    const PipelineConfig cfg = load_with_overrides(config_path, o);
    fs::create_directories(cfg.out_dir);
    Pipeline pipeline(cfg);
    const TrialsReport report = pipeline.run_trials();

    write_text(cfg.out_dir / "metrics.json", metrics_to_json(cfg, report));
    write_text(cfg.out_dir / "config.json", config_to_json(cfg));
    const ClassificationMap& first = report.maps.front();
    store_cube(map_to_cube(first), cfg.out_dir / "map", Dtype::f32, map_header(first));
    write_bytes(cfg.out_dir / "map.png", render_map(first.as_label_map()));
    write_bytes(cfg.out_dir / "map_labeled.png", render_map(first.as_label_map(), &report.heatmap.mask));
    write_bytes(cfg.out_dir / "heatmap.png", render_heatmap(report.heatmap));
    if (dump_regions) {
        const auto feats = pipeline.features(Method::sar_svm_stv);
        store_cube(feats->regions->size_map(), cfg.out_dir / "regions");
    }

    const auto& s = report.summary;
    std::printf("%s  trials=%d  OA=%.4f±%.4f  AA=%.4f±%.4f  Kappa=%.4f±%.4f  heatmap mass=%zu\n",
                to_string(cfg.method).c_str(), s.trials, s.oa.mean, s.oa.std, s.aa.mean, s.aa.std, s.kappa.mean,
                s.kappa.std, report.heatmap.mass());
    return 0;
}

int run_tune(const std::string& config_path, const Overrides& o, const std::vector<double>& b1,
             const std::vector<double>& b2) {
    const PipelineConfig cfg = load_with_overrides(config_path, o);
    Pipeline pipeline(cfg);
    const BetaTuning t = pipeline.tune_betas(b1, b2);
    nlohmann::json j;
    j["beta1"] = t.beta1;
    j["beta2"] = t.beta2;
    j["score"] = t.best_score;
    for (const auto& s : t.scores) j["grid"].push_back({{"beta1", s[0]}, {"beta2", s[1]}, {"score", s[2]}});
    fs::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "betas.json", j.dump(2));
    std::printf("beta1=%g beta2=%g score=%.6f\n", t.beta1, t.beta2, t.best_score);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-spatial hyperspectral classification (SaR-SVM-STV)"};
    app.require_subcommand(1);

    std::string config;
    Overrides o;
    bool dump_regions = false;
    auto* classify_cmd = app.add_subcommand("classify", "run trials and write metrics, maps and heatmap");
    add_overrides(classify_cmd, config, o);
    classify_cmd->add_flag("--dump-regions", dump_regions, "write the SA region-size map");

    std::vector<double> beta1_grid{0.0, 0.05, 0.1, 0.2, 0.4};
    std::vector<double> beta2_grid{0.0, 0.5, 1.0, 2.0, 4.0};
    auto* tune_cmd = app.add_subcommand("tune-betas", "grid-search the STV weights on cached probabilities");
    add_overrides(tune_cmd, config, o);
    tune_cmd->add_option("--beta1", beta1_grid, "beta1 grid")->delimiter(',');
    tune_cmd->add_option("--beta2", beta2_grid, "beta2 grid")->delimiter(',');

    int height = 40, width = 40, bands = 20, classes = 3;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    auto* synth_cmd = app.add_subcommand("synth", "write a striped synthetic cube and its labels");
    synth_cmd->add_option("--height", height);
    synth_cmd->add_option("--width", width);
    synth_cmd->add_option("--bands", bands);
    synth_cmd->add_option("--classes", classes);
    synth_cmd->add_option("--noise", noise, "per-band noise std");
    bool noise_in_gaps = false;
    synth_cmd->add_flag("--relative-noise", noise_in_gaps, "interpret --noise as a multiple of the inter-class gap");
    synth_cmd->add_option("--seed", seed);
    synth_cmd->add_option("--out", out, "output prefix: <out>.json/.raw and <out>_labels.csv")->required();

    std::string map_path, truth_path;
    int per_class = 0;
    auto* eval_cmd = app.add_subcommand("eval", "score a classification map against ground truth");
    eval_cmd->add_option("--map", map_path, "map cube or label file")->required();
    eval_cmd->add_option("--truth", truth_path, "ground-truth labels")->required();
    eval_cmd->add_option("--exclude-per-class", per_class, "exclude a training draw of this size");
    eval_cmd->add_option("--seed", seed, "seed of the excluded training draw");

    std::string cube_path;
    IciConfig ici;
    std::string regions_out;
    auto* rec_cmd = app.add_subcommand("reconstruct", "shape-adaptive reconstruction of a cube");
    rec_cmd->add_option("--cube", cube_path)->required();
    rec_cmd->add_option("--scales", ici.scales)->delimiter(',');
    rec_cmd->add_option("--gamma", ici.gamma);
    rec_cmd->add_option("--noise-sigma", ici.noise_sigma);
    rec_cmd->add_option("--dump-regions", regions_out, "write the region-size map here");
    rec_cmd->add_option("--out", out)->required();

    StvParams stv;
    std::optional<double> rho;
    std::string tensor_path, labels_path;
    auto* den_cmd = app.add_subcommand("denoise", "STV-smooth every channel of a tensor");
    den_cmd->add_option("--in", tensor_path)->required();
    den_cmd->add_option("--out", out)->required();
    den_cmd->add_option("--beta1", stv.beta1);
    den_cmd->add_option("--beta2", stv.beta2);
    den_cmd->add_option("--rho", rho);
    den_cmd->add_option("--tol", stv.tol);
    den_cmd->add_option("--max-iter", stv.max_iter);
    den_cmd->add_flag("--isotropic", stv.isotropic);
    den_cmd->add_option("--labels", labels_path, "ground truth; with --per-class, hold a training draw fixed");
    den_cmd->add_option("--per-class", per_class);
    den_cmd->add_option("--seed", seed);

    std::string model_path;
    SvmParams svm;
    auto* train_cmd = app.add_subcommand("train", "train a probability SVM on a labeled cube");
    train_cmd->add_option("--cube", cube_path)->required();
    train_cmd->add_option("--labels", labels_path)->required();
    train_cmd->add_option("--per-class", per_class, "labels per class (0 = all)");
    train_cmd->add_option("--seed", seed);
    train_cmd->add_option("--nu", svm.nu);
    train_cmd->add_option("--gamma", svm.gamma);
    train_cmd->add_option("--out", model_path)->required();

    auto* predict_cmd = app.add_subcommand("predict", "probability tensor from a trained SVM");
    predict_cmd->add_option("--model", model_path)->required();
    predict_cmd->add_option("--cube", cube_path)->required();
    predict_cmd->add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*classify_cmd) return run_classify(config, o, dump_regions);
        if (*tune_cmd) return run_tune(config, o, beta1_grid, beta2_grid);

        if (*synth_cmd) {
            SynthLayout layout = stripe_layout(height, width, classes);
            double sigma = noise;
            if (noise_in_gaps) sigma = noise * interclass_gap(default_endmembers(classes, bands));
            const SynthScene scene = synth_cube(layout, bands, sigma, seed);
            store_cube(scene.cube, out);
            store_labels_csv(scene.labels, out + "_labels.csv");
            std::printf("wrote %s.json/.raw (%dx%dx%d, sigma=%g) and %s_labels.csv\n", out.c_str(), height, width,
                        bands, sigma, out.c_str());
            return 0;
        }

        if (*eval_cmd) {
            const LabelMap pred = read_map(map_path);
            const LabelMap truth = load_labels(truth_path);
            ClassificationMap map;
            map.height = pred.height;
            map.width = pred.width;
            map.classes = std::max(pred.num_classes, truth.num_classes);
            map.labels = pred.labels;
            std::optional<TrainingSet> exclude;
            if (per_class > 0) exclude = sample_training_set(truth, per_class, seed);
            const MetricsReport m = evaluate(map, truth, exclude ? &*exclude : nullptr);
            std::cout << metrics_to_json(m) << '\n';
            return 0;
        }

        if (*rec_cmd) {
            ici.validate();
            const HsiCube cube = load_cube(cube_path);
            const RegionMap regions = compute_regions(first_principal_component(cube), ici);
            const ReconstructResult r = reconstruct_cube(cube, regions);
            store_cube(r.cube, out);
            if (!regions_out.empty()) store_cube(regions.size_map(), regions_out);
            for (const auto& d : r.diagnostics)
                std::fprintf(stderr, "pixel (%d,%d): %s\n", d.pixel.row, d.pixel.col, d.message.c_str());
            return 0;
        }

        if (*den_cmd) {
            stv.rho = rho;
            stv.validate();
            const ProbabilityTensor v(load_cube(tensor_path));
            FixedMask fixed = FixedMask::none(v.height(), v.width());
            if (!labels_path.empty() && per_class > 0) {
                const LabelMap truth = load_labels(labels_path);
                fixed = FixedMask::from_training(sample_training_set(truth, per_class, seed), v.height(), v.width());
            }
            const StvTensorResult r = stv_denoise_tensor(v, stv, fixed);
            store_cube(r.u.data, out, Dtype::f64);
            if (r.unconverged_channels > 0)
                std::fprintf(stderr, "warning: %d channel(s) stopped at max_iter\n", r.unconverged_channels);
            return 0;
        }

        if (*train_cmd) {
            const HsiCube cube = load_cube(cube_path);
            const LabelMap truth = load_labels(labels_path);
            check_same_grid(truth, cube);
            std::vector<LabeledPixel> samples;
            if (per_class > 0) {
                samples = sample_training_set(truth, per_class, seed).samples;
            } else {
                for (int r = 0; r < truth.height; ++r)
                    for (int c = 0; c < truth.width; ++c)
                        if (truth.at(r, c) > 0) samples.push_back({r, c, truth.at(r, c)});
            }
            SampleMatrix x(static_cast<Eigen::Index>(samples.size()), cube.bands());
            std::vector<int> y;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                for (int b = 0; b < cube.bands(); ++b)
                    x(static_cast<Eigen::Index>(i), b) = cube.at(samples[i].row, samples[i].col, b);
                y.push_back(samples[i].cls);
            }
            svm.seed = seed;
            const SvmClassifier clf = train_classifier(x, y, truth.num_classes, svm);
            store_classifier(clf, model_path);
            std::printf("trained %zu pairwise models on %zu samples\n", clf.models.size(), samples.size());
            return 0;
        }

        if (*predict_cmd) {
            const SvmClassifier clf = load_classifier(model_path);
            const ProbabilityTensor v = predict_prob_tensor(clf, load_cube(cube_path));
            store_cube(v.data, out, Dtype::f64);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
