#include "sarstv/reduce.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "band_covariance.hpp"
#include "json.hpp"
#include "sarstv/error.hpp"
#include "sarstv/io.hpp"

namespace sarstv {

PcaModel fit_pca(const HsiCube& cube, double variance_fraction) {
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw InvalidArgument("variance_fraction must lie in (0, 1]");
    }
    auto eig = detail::band_eigen(cube);
    const Eigen::Index b = eig.eigenvalues.size();

    // Eigenvalues at rounding level are exact zeros of the covariance.
    const double cutoff = eig.eigenvalues[0] * static_cast<double>(b) * 1e-13;
    for (Eigen::Index i = 0; i < b; ++i) {
        if (eig.eigenvalues[i] <= cutoff) eig.eigenvalues[i] = 0.0;
    }
    const double total = eig.eigenvalues.sum();
    if (!(total > 0.0)) throw InvalidArgument("cube has zero total variance");

    Eigen::Index r = 0;
    double cumulative = 0.0;
    while (r < b) {
        cumulative += eig.eigenvalues[r];
        ++r;
        if (cumulative >= variance_fraction * total * (1.0 - 1e-12)) break;
    }
    // fraction 1.0 must stop at the rank, never pick up zero-variance directions
    while (r > 1 && eig.eigenvalues[r - 1] == 0.0) --r;

    PcaModel model;
    model.mean = eig.mean;
    model.components = eig.eigenvectors.leftCols(r).transpose();
    model.explained = eig.eigenvalues.head(r) / total;
    model.eigenvalues = eig.eigenvalues;
    return model;
}

Cube pca_transform(const PcaModel& model, const HsiCube& cube) {
    if (cube.bands() != model.input_bands()) {
        throw InvalidArgument("pca_transform: cube has " + std::to_string(cube.bands()) + " bands, model expects " +
                              std::to_string(model.input_bands()));
    }
    const auto x = detail::pixel_rows(cube);
    // N x r, column-major, which is already band-sequential.
    Eigen::MatrixXd scores = (x.rowwise() - model.mean.transpose()) * model.components.transpose();
    return Cube(cube.height(), cube.width(), model.output_bands(),
                std::vector<double>(scores.data(), scores.data() + scores.size()));
}

Cube pca_inverse_transform(const PcaModel& model, const Cube& scores) {
    if (scores.bands() != model.output_bands()) throw InvalidArgument("pca_inverse_transform: band mismatch");
    const auto s = detail::pixel_rows(scores);
    Eigen::MatrixXd x = (s * model.components).rowwise() + model.mean.transpose();
    return Cube(scores.height(), scores.width(), model.input_bands(),
                std::vector<double>(x.data(), x.data() + x.size()));
}

void store_pca(const PcaModel& model, const std::filesystem::path& path) {
    const int b = model.input_bands();
    const int r = model.output_bands();
    Cube payload(r + 1, b, 1);
    for (int j = 0; j < b; ++j) payload.at(0, j, 0) = model.mean[j];
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < b; ++j) payload.at(i + 1, j, 0) = model.components(i, j);
    }
    nlohmann::json extra;
    extra["kind"] = "pca";
    extra["eigenvalues"] = std::vector<double>(model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
    store_cube(payload, path, Dtype::f64, extra.dump());
}

PcaModel load_pca(const std::filesystem::path& path) {
    const Cube payload = load_cube(path);
    std::ifstream in(cube_paths(path).header);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto header = nlohmann::json::parse(ss.str());
    if (header.value("kind", "") != "pca") throw FormatError(path.string() + ": not a PCA model");
    const auto eigen = header.at("eigenvalues").get<std::vector<double>>();

    const int b = payload.width();
    const int r = payload.height() - 1;
    if (r < 1 || static_cast<int>(eigen.size()) != b) throw FormatError(path.string() + ": inconsistent PCA model");

    PcaModel model;
    model.mean.resize(b);
    model.components.resize(r, b);
    for (int j = 0; j < b; ++j) model.mean[j] = payload.at(0, j, 0);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < b; ++j) model.components(i, j) = payload.at(i + 1, j, 0);
    }
    model.eigenvalues = Eigen::Map<const Eigen::VectorXd>(eigen.data(), b);
    const double total = model.eigenvalues.sum();
    model.explained = model.eigenvalues.head(r) / total;
    return model;
}

}  // namespace sarstv
