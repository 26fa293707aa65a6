#include "sarstv/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "sarstv/error.hpp"
#include "sarstv/parallel.hpp"

namespace sarstv {

double pearson_corr(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("pearson_corr: length mismatch");
    if (a.size() < 2) throw InvalidArgument("pearson_corr: need at least two bands");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

SpectraMatrix gather_spectra(const HsiCube& cube, const SaRegion& region) {
    SpectraMatrix s(cube.bands(), static_cast<Eigen::Index>(region.size()));
    for (std::size_t i = 0; i < region.size(); ++i) {
        const int r = region.center.row + region.offsets[i].drow;
        const int c = region.center.col + region.offsets[i].dcol;
        if (r < 0 || r >= cube.height() || c < 0 || c >= cube.width()) {
            throw InvalidArgument("region member outside the cube");
        }
        for (int b = 0; b < cube.bands(); ++b) s(b, static_cast<Eigen::Index>(i)) = cube.at(r, c, b);
    }
    return s;
}

WeightVector weight_vector(std::span<const double> center, const SpectraMatrix& region_spectra) {
    const Eigen::Index n = region_spectra.cols();
    if (n < 1) throw InvalidArgument("weight_vector: empty region");
    if (region_spectra.rows() != static_cast<Eigen::Index>(center.size())) {
        throw InvalidArgument("weight_vector: band count mismatch");
    }
    WeightVector p(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const Eigen::VectorXd col = region_spectra.col(i);
        p[i] = std::max(0.0, pearson_corr(center, std::span<const double>(col.data(), col.size())));
    }
    p[n - 1] = 1.0;
    const double sum = p.sum();
    if (!(sum > 1e-12) || !std::isfinite(sum)) {
        p.setZero();
        p[n - 1] = 1.0;
        return p;
    }
    return p / sum;
}

Eigen::VectorXd reconstruct_pixel(const SpectraMatrix& region_spectra, const WeightVector& weights) {
    if (region_spectra.cols() != weights.size()) throw InvalidArgument("reconstruct_pixel: dimension mismatch");
    return region_spectra * weights;
}

ReconstructResult reconstruct_cube(const HsiCube& cube, const RegionMap& regions) {
    if (regions.height != cube.height() || regions.width != cube.width() ||
        regions.regions.size() != cube.pixels()) {
        throw InvalidArgument("region map does not cover the cube");
    }
    const int bands = cube.bands();
    const std::size_t npix = cube.pixels();

    // Centered spectra and their norms make each correlation a single dot
    // product; this is the same quantity pearson_corr() evaluates.
    const std::vector<double> raw = cube.to_pixel_major();
    std::vector<double> centered(raw.size());
    std::vector<double> norms(npix);
    for (std::size_t p = 0; p < npix; ++p) {
        const double* x = raw.data() + p * bands;
        double mean = 0.0;
        for (int b = 0; b < bands; ++b) mean += x[b];
        mean /= bands;
        double ss = 0.0;
        for (int b = 0; b < bands; ++b) {
            const double d = x[b] - mean;
            centered[p * bands + b] = d;
            ss += d * d;
        }
        norms[p] = std::sqrt(ss);
    }

    std::vector<double> out(raw.size());
    std::vector<std::vector<PixelDiagnostic>> diag_rows(cube.height());
    parallel_for(static_cast<std::size_t>(cube.height()), [&](std::size_t row) {
        std::vector<double> weights;
        for (int col = 0; col < cube.width(); ++col) {
            const std::size_t p = row * cube.width() + col;
            const SaRegion& region = regions.regions[p];
            double* dst = out.data() + p * bands;
            const double* src = raw.data() + p * bands;
            try {
                if (region.offsets.empty() || region.offsets.back() != Offset{0, 0}) {
                    throw InvalidArgument("region center missing or not last");
                }
                const std::size_t n = region.size();
                weights.assign(n, 0.0);
                double sum = 1.0;
                weights[n - 1] = 1.0;
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const int r = region.center.row + region.offsets[i].drow;
                    const int c = region.center.col + region.offsets[i].dcol;
                    if (r < 0 || r >= cube.height() || c < 0 || c >= cube.width()) {
                        throw InvalidArgument("region member outside the cube");
                    }
                    const std::size_t q = static_cast<std::size_t>(r) * cube.width() + c;
                    double corr = 0.0;
                    if (norms[p] > 0.0 && norms[q] > 0.0) {
                        double dot = 0.0;
                        const double* a = centered.data() + p * bands;
                        const double* b = centered.data() + q * bands;
                        for (int k = 0; k < bands; ++k) dot += a[k] * b[k];
                        corr = std::clamp(dot / (norms[p] * norms[q]), -1.0, 1.0);
                    }
                    weights[i] = std::max(0.0, corr);
                    sum += weights[i];
                }
                std::fill(dst, dst + bands, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double w = weights[i] / sum;
                    if (w == 0.0) continue;
                    const int r = region.center.row + region.offsets[i].drow;
                    const int c = region.center.col + region.offsets[i].dcol;
                    const double* s = raw.data() + (static_cast<std::size_t>(r) * cube.width() + c) * bands;
                    for (int k = 0; k < bands; ++k) dst[k] += w * s[k];
                }
            } catch (const Error& e) {
                std::copy(src, src + bands, dst);
                diag_rows[row].push_back({{static_cast<int>(row), col}, e.what()});
            }
        }
    });

    ReconstructResult result;
    result.cube = Cube::from_pixel_major(cube.height(), cube.width(), bands, out);
    for (auto& d : diag_rows) {
        result.diagnostics.insert(result.diagnostics.end(), d.begin(), d.end());
    }
    return result;
}

}  // namespace sarstv
