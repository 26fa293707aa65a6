#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sarstv/cube.hpp"

namespace sarstv {

/// Single-channel M x N image, row-major.
struct Plane {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(int h, int w, double fill = 0.0) : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}
    Plane(int h, int w, std::vector<double> v);

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const noexcept { return values.size(); }
};

/// Forward differences; the last row of `drow` and the last column of
/// `dcol` are zero (Neumann boundary).
struct GradientField {
    Plane drow;
    Plane dcol;
};

struct StvParams {
    double beta1 = 0.2;          ///< weight of ||grad u||_1
    double beta2 = 1.0;          ///< weight of 1/2 ||grad u||_2^2
    std::optional<double> rho;   ///< ADMM penalty; 2 * beta1 + 0.1 when unset
    double tol = 1e-4;           ///< relative primal/dual residual tolerance
    int max_iter = 200;
    double cg_tol = 1e-8;
    int cg_max_iter = 2000;
    bool isotropic = false;      ///< couple the two gradient components in the L1 term

    double penalty() const { return rho ? *rho : 2.0 * beta1 + 0.1; }
    void validate() const;
};

/// Smoothing weights used for the two benchmark scenes.
/// "indian_pines": beta1 = 0.2, beta2 = 4; "pavia_u": beta1 = 0.2, beta2 = 1.
std::optional<StvParams> stv_preset(std::string_view dataset);

/// Pixels whose value is held at the input (the training set).
struct FixedMask {
    int height = 0;
    int width = 0;
    std::vector<unsigned char> fixed;  // row-major, 1 = held

    static FixedMask none(int height, int width);
    static FixedMask from_training(const TrainingSet& set, int height, int width);
    std::size_t count() const;
};

GradientField grad(const Plane& u);
/// Negative adjoint of grad: <grad u, g> = -<u, div g>.
Plane div(const GradientField& g);
/// Componentwise soft threshold sign(x) * max(|x| - t, 0).
GradientField shrink(const GradientField& g, double t);
/// Joint soft threshold of each pixel's (drow, dcol) pair by its length.
GradientField shrink_isotropic(const GradientField& g, double t);

/// 1/2 ||u - v||^2 + beta1 ||grad u||_1 + beta2/2 ||grad u||_2^2.
double stv_objective(const Plane& u, const Plane& v, const StvParams& params);

struct StvResult {
    Plane u;
    int iterations = 0;
    bool converged = false;  ///< false when max_iter stopped the solve
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    long cg_iterations = 0;
};

/// ADMM on the split d = grad u with scaled dual b:
///   u <- solve (I + (beta2 + rho) L) u = v - rho div(d - b), L = -div grad, by CG
///   u|fixed <- v|fixed
///   d <- shrink(grad u + b, beta1 / rho)
///   b <- b + grad u - d
/// Throws ConvergenceError if a CG solve fails.
StvResult stv_denoise_channel(const Plane& v, const StvParams& params, const FixedMask& fixed);

struct StvTensorResult {
    ProbabilityTensor u;
    std::vector<StvResult> channels;  ///< per-channel diagnostics; `u` members left empty
    int unconverged_channels = 0;
};

/// Channels are smoothed independently and in parallel. The output is not
/// renormalized across classes.
StvTensorResult stv_denoise_tensor(const ProbabilityTensor& v, const StvParams& params, const FixedMask& fixed);

}  // namespace sarstv
