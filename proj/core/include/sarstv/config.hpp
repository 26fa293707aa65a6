#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sarstv/regions.hpp"
#include "sarstv/stv.hpp"
#include "sarstv/svm.hpp"

namespace sarstv {

enum class Method { svm, svm_stv, sar_svm_stv };

/// "svm", "svm-stv", "sar-svm-stv".
Method parse_method(std::string_view name);
std::string to_string(Method m);

inline bool uses_sar(Method m) { return m == Method::sar_svm_stv; }
inline bool uses_stv(Method m) { return m != Method::svm; }

enum class EvalMode { exclude_training, all_labeled };

EvalMode parse_eval_mode(std::string_view name);
std::string to_string(EvalMode m);

struct DatasetConfig {
    std::string name;  ///< "indian_pines", "pavia_u", or free-form
    std::filesystem::path cube;
    std::filesystem::path labels;
};

struct PcaConfig {
    bool enabled = true;
    double variance_fraction = 0.999;
};

struct SvmConfig {
    SvmGrid grid;
    int folds = 5;
    double tol = 1e-3;
    long max_iter = 10'000'000;
    std::size_t cache_mb = 256;
};

struct PipelineConfig {
    DatasetConfig dataset;
    Method method = Method::sar_svm_stv;
    int per_class = 10;
    int trials = 10;
    std::uint64_t seed = 0;
    EvalMode evaluation = EvalMode::exclude_training;
    IciConfig sar;
    PcaConfig pca;
    SvmConfig svm;
    /// Required when the method smooths; filled from stv_preset() for the
    /// benchmark scene names when the file omits it.
    std::optional<StvParams> stv;
    std::filesystem::path out_dir = "out";

    /// Throws InvalidArgument on inconsistent settings; with check_files,
    /// also when the dataset files are missing.
    void validate(bool check_files) const;
};

/// Parses the JSON config. Relative dataset paths resolve against base_dir.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, fixed formatting) of every setting that
/// affects results.
std::string config_to_json(const PipelineConfig& cfg);
std::uint64_t config_hash(const PipelineConfig& cfg);

}  // namespace sarstv
