#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "sarstv/cube.hpp"

namespace sarstv {

struct PcaModel {
    Eigen::VectorXd mean;        ///< length B
    Eigen::MatrixXd components;  ///< r x B, orthonormal rows, descending variance
    Eigen::VectorXd explained;   ///< variance fraction of each kept component
    Eigen::VectorXd eigenvalues; ///< all B covariance eigenvalues, descending

    int input_bands() const { return static_cast<int>(mean.size()); }
    int output_bands() const { return static_cast<int>(components.rows()); }
    double retained() const { return explained.sum(); }
};

/// Keeps the smallest r whose cumulative explained variance reaches
/// variance_fraction. Throws InvalidArgument when the fraction is outside
/// (0, 1] or the cube has zero total variance.
PcaModel fit_pca(const HsiCube& cube, double variance_fraction);

/// Scores components * (spectrum - mean) for every pixel; r bands out.
Cube pca_transform(const PcaModel& model, const HsiCube& cube);
/// components^T * scores + mean; exact inverse only when r == B.
Cube pca_inverse_transform(const PcaModel& model, const Cube& scores);

// Persisted as one f64 cube of height r+1, width B, one band: row 0 holds
// the mean, rows 1..r the components. The header also records eigenvalues.
void store_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace sarstv
