#include "sarstv/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sarstv/error.hpp"
#include "sarstv/hash.hpp"
#include "sarstv/io.hpp"

namespace sarstv {

namespace fs = std::filesystem;
using nlohmann::json;

Method parse_method(std::string_view name) {
    if (name == "svm" || name == "nu-svm") return Method::svm;
    if (name == "svm-stv") return Method::svm_stv;
    if (name == "sar-svm-stv") return Method::sar_svm_stv;
    throw InvalidArgument("unknown method '" + std::string(name) + "' (expected svm, svm-stv or sar-svm-stv)");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::svm: return "svm";
        case Method::svm_stv: return "svm-stv";
        case Method::sar_svm_stv: return "sar-svm-stv";
    }
    return "?";
}

EvalMode parse_eval_mode(std::string_view name) {
    if (name == "exclude-training") return EvalMode::exclude_training;
    if (name == "all-labeled") return EvalMode::all_labeled;
    throw InvalidArgument("unknown evaluation mode '" + std::string(name) + "'");
}

std::string to_string(EvalMode m) {
    return m == EvalMode::exclude_training ? "exclude-training" : "all-labeled";
}

void PipelineConfig::validate(bool check_files) const {
    if (per_class < 1) throw InvalidArgument("per_class must be >= 1");
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    sar.validate();
    if (!(pca.variance_fraction > 0.0 && pca.variance_fraction <= 1.0)) {
        throw InvalidArgument("pca.variance_fraction must lie in (0, 1]");
    }
    if (svm.grid.nu.empty() || svm.grid.gamma.empty()) throw InvalidArgument("svm grids must be nonempty");
    if (svm.folds < 2) throw InvalidArgument("svm.folds must be >= 2");
    if (uses_stv(method)) {
        if (!stv) throw InvalidArgument("method " + to_string(method) + " needs an stv block");
        stv->validate();
    }
    if (check_files) {
        if (!fs::exists(cube_paths(dataset.cube).header)) {
            throw InvalidArgument("cube header not found: " + cube_paths(dataset.cube).header.string());
        }
        if (!fs::exists(dataset.labels)) throw InvalidArgument("label file not found: " + dataset.labels.string());
    }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    PipelineConfig cfg;
    try {
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            cfg.dataset.name = d.value("name", "");
            if (d.contains("cube")) cfg.dataset.cube = resolve(base_dir, d["cube"].get<std::string>());
            if (d.contains("labels")) cfg.dataset.labels = resolve(base_dir, d["labels"].get<std::string>());
        }
        if (j.contains("method")) cfg.method = parse_method(j["method"].get<std::string>());
        cfg.per_class = j.value("per_class", cfg.per_class);
        cfg.trials = j.value("trials", cfg.trials);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("evaluation")) cfg.evaluation = parse_eval_mode(j["evaluation"].get<std::string>());
        if (j.contains("sar")) {
            const auto& s = j["sar"];
            if (s.contains("scales")) cfg.sar.scales = s["scales"].get<std::vector<int>>();
            cfg.sar.gamma = s.value("gamma", cfg.sar.gamma);
            if (s.contains("noise_sigma") && !s["noise_sigma"].is_null()) cfg.sar.noise_sigma = s["noise_sigma"].get<double>();
        }
        if (j.contains("pca")) {
            const auto& p = j["pca"];
            cfg.pca.enabled = p.value("enabled", cfg.pca.enabled);
            cfg.pca.variance_fraction = p.value("variance_fraction", cfg.pca.variance_fraction);
        }
        if (j.contains("svm")) {
            const auto& s = j["svm"];
            if (s.contains("nu_grid")) cfg.svm.grid.nu = s["nu_grid"].get<std::vector<double>>();
            if (s.contains("gamma_grid")) cfg.svm.grid.gamma = s["gamma_grid"].get<std::vector<double>>();
            cfg.svm.folds = s.value("folds", cfg.svm.folds);
            cfg.svm.tol = s.value("tol", cfg.svm.tol);
            cfg.svm.max_iter = s.value("max_iter", cfg.svm.max_iter);
            cfg.svm.cache_mb = s.value("cache_mb", cfg.svm.cache_mb);
        }
        if (j.contains("stv") && !j["stv"].is_null()) {
            const auto& s = j["stv"];
            StvParams p = stv_preset(cfg.dataset.name).value_or(StvParams{});
            p.beta1 = s.value("beta1", p.beta1);
            p.beta2 = s.value("beta2", p.beta2);
            if (s.contains("rho") && !s["rho"].is_null()) p.rho = s["rho"].get<double>();
            p.tol = s.value("tol", p.tol);
            p.max_iter = s.value("max_iter", p.max_iter);
            p.cg_tol = s.value("cg_tol", p.cg_tol);
            p.cg_max_iter = s.value("cg_max_iter", p.cg_max_iter);
            p.isotropic = s.value("isotropic", p.isotropic);
            cfg.stv = p;
        } else if (uses_stv(cfg.method)) {
            cfg.stv = stv_preset(cfg.dataset.name);
        }
        if (j.contains("out")) cfg.out_dir = resolve(base_dir, j["out"].get<std::string>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const PipelineConfig& cfg) {
    json j;
    j["dataset"] = {{"name", cfg.dataset.name}, {"cube", cfg.dataset.cube.string()}, {"labels", cfg.dataset.labels.string()}};
    j["method"] = to_string(cfg.method);
    j["per_class"] = cfg.per_class;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["evaluation"] = to_string(cfg.evaluation);
    j["sar"] = {{"scales", cfg.sar.scales}, {"gamma", cfg.sar.gamma}};
    j["sar"]["noise_sigma"] = cfg.sar.noise_sigma ? json(*cfg.sar.noise_sigma) : json(nullptr);
    j["pca"] = {{"enabled", cfg.pca.enabled}, {"variance_fraction", cfg.pca.variance_fraction}};
    j["svm"] = {{"nu_grid", cfg.svm.grid.nu}, {"gamma_grid", cfg.svm.grid.gamma}, {"folds", cfg.svm.folds},
                {"tol", cfg.svm.tol}, {"max_iter", cfg.svm.max_iter}, {"cache_mb", cfg.svm.cache_mb}};
    if (cfg.stv) {
        const auto& s = *cfg.stv;
        j["stv"] = {{"beta1", s.beta1}, {"beta2", s.beta2}, {"rho", s.penalty()}, {"tol", s.tol},
                    {"max_iter", s.max_iter}, {"cg_tol", s.cg_tol}, {"cg_max_iter", s.cg_max_iter},
                    {"isotropic", s.isotropic}};
    } else {
        j["stv"] = nullptr;
    }
    return j.dump(2);
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
    return Fnv1a().text(config_to_json(cfg)).digest();
}

}  // namespace sarstv
