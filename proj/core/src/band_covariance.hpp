#pragma once

#include <Eigen/Dense>

#include "sarstv/cube.hpp"

namespace sarstv::detail {

// Eigendecomposition of the sample (1/(n-1)) band covariance of a cube,
// pixels as samples. Eigenvalues descending and clipped at zero; each
// eigenvector is signed so its largest-magnitude entry is positive.
struct BandEigen {
    Eigen::VectorXd mean;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // B x B, column i pairs with eigenvalues[i]
};

BandEigen band_eigen(const Cube& cube);

/// Column-major N x B view over a band-sequential cube.
inline Eigen::Map<const Eigen::MatrixXd> pixel_rows(const Cube& cube) {
    return {cube.values().data(), static_cast<Eigen::Index>(cube.pixels()), cube.bands()};
}

}  // namespace sarstv::detail
