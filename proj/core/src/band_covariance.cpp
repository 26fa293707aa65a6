#include "band_covariance.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "sarstv/error.hpp"

namespace sarstv::detail {

BandEigen band_eigen(const Cube& cube) {
    const auto n = static_cast<Eigen::Index>(cube.pixels());
    if (n < 2) throw InvalidArgument("band covariance needs at least two pixels");
    const auto x = pixel_rows(cube);

    BandEigen out;
    out.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - out.mean.transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(cube.bands(), cube.bands());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n - 1));
    cov = cov.selfadjointView<Eigen::Lower>();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("band covariance eigendecomposition failed");

    const Eigen::Index b = cube.bands();
    std::vector<Eigen::Index> order(b);
    std::iota(order.begin(), order.end(), 0);
    // Eigen returns ascending eigenvalues; a stable reverse keeps ties deterministic.
    std::reverse(order.begin(), order.end());

    out.eigenvalues.resize(b);
    out.eigenvectors.resize(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        out.eigenvalues[i] = std::max(0.0, solver.eigenvalues()[order[i]]);
        Eigen::VectorXd v = solver.eigenvectors().col(order[i]);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        out.eigenvectors.col(i) = v;
    }
    return out;
}

}  // namespace sarstv::detail
