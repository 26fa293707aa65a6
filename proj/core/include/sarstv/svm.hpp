#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sarstv/cube.hpp"

namespace sarstv {

/// Samples are matrix rows.
using SampleMatrix = Eigen::MatrixXd;

struct SvmParams {
    double nu = 0.1;      ///< upper bound on margin errors, lower bound on support vectors
    double gamma = 1.0;   ///< RBF scale: k(x, y) = exp(-gamma * |x - y|^2)
    double tol = 1e-3;    ///< SMO stopping tolerance on the maximal KKT violation
    long max_iter = 10'000'000;
    std::size_t cache_mb = 256;  ///< kernel rows kept in memory
    bool probability = true;     ///< fit Platt parameters after training
    int probability_folds = 5;
    std::uint64_t seed = 0;      ///< fold assignment for Platt cross-validation

    void validate() const;
};

struct SvmGrid {
    std::vector<double> nu{0.05, 0.1, 0.2, 0.3, 0.4};
    std::vector<double> gamma{0.0078125, 0.015625, 0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
};

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

/// Binary nu-SVM. The decision value is sum_i coef[i] * k(sv_i, x) - rho,
/// positive for the +1 class.
struct BinaryModel {
    std::vector<int> support;          ///< row indices into the training matrix
    std::vector<double> coef;          ///< y_i * alpha_i / r
    SampleMatrix support_vectors;      ///< rows matching `support`
    double rho = 0.0;
    double gamma = 1.0;
    bool has_probability = false;
    double platt_a = 0.0;
    double platt_b = 0.0;

    // Solver diagnostics.
    long iterations = 0;
    double max_violation = 0.0;
    double margin_scale = 1.0;  ///< the nu-dual's r; 1/r plays the role of C
    int bounded_support = 0;    ///< alphas at the upper bound

    double decision_value(std::span<const double> x) const;
    /// P(y = +1 | x) from the Platt sigmoid.
    double probability(double decision) const;
};

/// Solves the nu-SVM dual by SMO, then (if params.probability) fits a Platt
/// sigmoid to cross-validated decision values. Labels must be +1/-1 and both
/// present. Throws InvalidArgument for an infeasible nu and ConvergenceError
/// when max_iter is hit.
BinaryModel train_binary(const SampleMatrix& x, std::span<const int> y, const SvmParams& params);

/// Largest feasible nu for the given class balance: 2 * min(n+, n-) / l.
double max_feasible_nu(std::span<const int> y);

/// Newton fit of P(y=1|f) = 1 / (1 + exp(A f + B)) with Platt's smoothed
/// targets. Returns {A, B}.
std::pair<double, double> fit_platt(std::span<const double> decision, std::span<const int> y);

/// Multiclass coupling of pairwise probabilities r(i, j) = P(i | i or j):
/// minimizes sum_{i != j} (r_ji p_i - r_ij p_j)^2 over the simplex with the
/// fixed-point iteration of Wu, Lin and Weng. Throws ConvergenceError when
/// the iteration cap is reached before the KKT error drops below tol.
Eigen::VectorXd couple_probabilities(const Eigen::MatrixXd& pairwise, double tol = 1e-10, int max_iter = 10000);

struct CouplingResult {
    Eigen::VectorXd p;
    int iterations = 0;
    bool converged = false;
};
CouplingResult couple_probabilities_iterate(const Eigen::MatrixXd& pairwise, double tol, int max_iter);

/// One-against-one model for classes (first, second); `first` is the +1 side.
struct PairModel {
    int first = 0;
    int second = 0;
    BinaryModel model;
};

/// One model per unordered class pair, in (1,2), (1,3), ..., (K-1,K) order.
/// Labels are 1..K and every class must be present.
std::vector<PairModel> train_multiclass(const SampleMatrix& x, std::span<const int> y, int classes,
                                        const SvmParams& params);

/// Majority vote over pairwise decision signs; ties go to the lower class.
int predict_vote(const std::vector<PairModel>& models, int classes, std::span<const double> x);

struct CvResult {
    SvmParams best;
    double best_accuracy = 0.0;
    int folds = 0;
    /// accuracy[i * gamma_count + j] for grid nu[i], gamma[j]
    std::vector<double> accuracy;
};

/// Stratified k-fold grid search over (nu, gamma) by mean fold accuracy of
/// one-against-one voting. Folds shrink to the smallest class count (>= 2).
/// Ties prefer the smaller gamma, then the smaller nu.
CvResult cross_validate(const SampleMatrix& x, std::span<const int> y, int classes, const SvmGrid& grid,
                        int folds, std::uint64_t seed, const SvmParams& base = {});

/// Per-feature standardization fitted on training samples.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const SampleMatrix& x);
    SampleMatrix apply(const SampleMatrix& x) const;
    void apply_inplace(std::span<double> x) const;
};

/// Everything needed to turn a reduced cube into a probability tensor.
struct SvmClassifier {
    int classes = 0;
    Standardizer scaler;
    SampleMatrix samples;       ///< standardized training samples
    std::vector<int> labels;    ///< 1..K
    SvmParams params;
    std::vector<PairModel> models;

    int features() const { return static_cast<int>(samples.cols()); }
};

/// Standardizes x, then trains the pairwise models with `params`.
SvmClassifier train_classifier(const SampleMatrix& x, std::span<const int> y, int classes, const SvmParams& params);

/// Class probability vector for one raw (unstandardized) feature vector.
Eigen::VectorXd predict_probabilities(const SvmClassifier& clf, std::span<const double> x);

/// Pairwise Platt probabilities, coupled per pixel.
ProbabilityTensor predict_prob_tensor(const SvmClassifier& clf, const Cube& reduced);

// Binary layout, all little-endian:
//   "SARSVM01" | u32 version | i32 K | i32 d | i32 n | f64 nu | f64 gamma
//   | f64[d] mean | f64[d] scale | f64[n*d] samples (row-major) | i32[n] labels
//   | i32 pairs | per pair: i32 first, i32 second, i32 nsv, f64 rho,
//     u8 has_prob, f64 A, f64 B, nsv x (i32 sample index, f64 coef)
void store_classifier(const SvmClassifier& clf, const std::filesystem::path& path);
SvmClassifier load_classifier(const std::filesystem::path& path);

}  // namespace sarstv
