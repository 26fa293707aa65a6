#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sarstv/cube.hpp"
#include "sarstv/regions.hpp"

namespace sarstv {

/// B x n spectra of a region; column i is region pixel i, the last column
/// is the center.
using SpectraMatrix = Eigen::MatrixXd;
/// Normalized correlation weights, one per region pixel, center last.
using WeightVector = Eigen::VectorXd;

/// Sample Pearson correlation over bands. A zero-variance input yields 0.
double pearson_corr(std::span<const double> a, std::span<const double> b);

SpectraMatrix gather_spectra(const HsiCube& cube, const SaRegion& region);

/// p_i = max(0, corr(center, column i)) for non-center columns, p_n = 1,
/// then p / sum(p). Falls back to a one-hot center weight if the sum is
/// not positive.
WeightVector weight_vector(std::span<const double> center, const SpectraMatrix& region_spectra);

/// S_nbs * w.
Eigen::VectorXd reconstruct_pixel(const SpectraMatrix& region_spectra, const WeightVector& weights);

struct PixelDiagnostic {
    Pixel pixel;
    std::string message;
};

struct ReconstructResult {
    HsiCube cube;
    /// Pixels whose reconstruction failed and kept their original spectrum.
    std::vector<PixelDiagnostic> diagnostics;
};

/// Every output spectrum is computed from the untouched input cube, so the
/// result does not depend on processing order.
ReconstructResult reconstruct_cube(const HsiCube& cube, const RegionMap& regions);

}  // namespace sarstv
