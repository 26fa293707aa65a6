#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "sarstv/cube.hpp"

namespace sarstv {

/// First principal component scores of a cube, standardized to zero mean
/// and unit (sample) variance. Drives the shape-adaptive region search.
struct GuideImage {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // row-major

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

struct Offset {
    int drow = 0;
    int dcol = 0;

    friend bool operator==(const Offset&, const Offset&) = default;
};

/// Pixels of one shape-adaptive region as offsets from its center. The
/// center (0,0) is always present exactly once and always last.
struct SaRegion {
    Pixel center;
    std::vector<Offset> offsets;

    std::size_t size() const noexcept { return offsets.size(); }
};

inline constexpr int kDirections = 8;

/// Unit steps of the eight LPA directions, counter-clockwise from +col:
/// E, NE, N, NW, W, SW, S, SE as (drow, dcol).
inline constexpr std::array<Offset, kDirections> kDirectionSteps{{
    {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1},
}};

struct IciConfig {
    std::vector<int> scales{1, 2, 3, 5, 8};  ///< ray lengths h in pixels, center included
    double gamma = 2.0;                      ///< ICI threshold
    /// Noise std of the guide image; estimated with estimate_noise_sigma()
    /// when unset.
    std::optional<double> noise_sigma;

    void validate() const;
};

struct LpaEstimate {
    double estimate = 0.0;
    double std = 0.0;
};

/// Projects every pixel onto the top eigenvector of the B x B band
/// covariance (sign chosen so the largest-magnitude loading is positive)
/// and standardizes the scores. Throws InvalidArgument on a zero-variance
/// cube.
GuideImage first_principal_component(const HsiCube& cube);

/// MAD of horizontal first differences / (sqrt(2) * 0.6745); vertical
/// differences when the image is one pixel wide. Floored at 1e-6 so
/// confidence intervals never collapse to points.
double estimate_noise_sigma(const GuideImage& img);

/// Zeroth-order LPA with uniform weights on the first `scale` pixels of
/// the ray from `pixel` along `direction`, clipped at the border. With L
/// pixels on the clipped ray, std = noise_sigma / sqrt(L).
LpaEstimate lpa_directional_estimate(const GuideImage& img, Pixel pixel, int direction, int scale,
                                     double noise_sigma);

/// Largest j such that the confidence intervals [y_i - gamma*s_i, y_i + gamma*s_i],
/// i <= j, have a common point. Accepted scales always form a prefix.
std::size_t ici_select_scale(std::span<const LpaEstimate> estimates, double gamma);

/// Adaptive radius (in pixel steps, 0 = center only) for each direction.
std::array<int, kDirections> directional_radii(const GuideImage& img, Pixel pixel, const IciConfig& cfg,
                                               double noise_sigma);

/// Pixels inside the octagon spanned by the eight directional radii: the
/// union of the eight rays and of the triangles between adjacent rays.
/// Offsets are sorted row-major, with the center moved to the end.
SaRegion sa_region(const GuideImage& img, Pixel pixel, const IciConfig& cfg);
SaRegion region_from_radii(Pixel center, const std::array<int, kDirections>& radii, int height, int width);

struct RegionMap {
    int height = 0;
    int width = 0;
    std::vector<SaRegion> regions;  // row-major, one per pixel

    const SaRegion& at(int row, int col) const { return regions[static_cast<std::size_t>(row) * width + col]; }
    /// Single-band cube of region sizes n.
    Cube size_map() const;
    /// Every pixel's region is just itself.
    static RegionMap singletons(int height, int width);
};

/// sa_region for every pixel, in parallel, with the noise level resolved once.
RegionMap compute_regions(const GuideImage& img, const IciConfig& cfg);

}  // namespace sarstv
