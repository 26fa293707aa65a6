#include "sarstv/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "band_covariance.hpp"
#include "sarstv/error.hpp"
#include "sarstv/parallel.hpp"

namespace sarstv {

void IciConfig::validate() const {
    if (scales.empty()) throw InvalidArgument("ICI scale list is empty");
    if (scales.front() < 1) throw InvalidArgument("ICI scales must be >= 1");
    for (std::size_t i = 1; i < scales.size(); ++i) {
        if (scales[i] <= scales[i - 1]) throw InvalidArgument("ICI scales must be strictly increasing");
    }
    if (!(gamma > 0.0)) throw InvalidArgument("ICI gamma must be positive");
    if (noise_sigma && !(*noise_sigma > 0.0)) throw InvalidArgument("ICI noise_sigma must be positive");
}

GuideImage first_principal_component(const HsiCube& cube) {
    const auto eig = detail::band_eigen(cube);
    if (!(eig.eigenvalues[0] > 0.0)) throw InvalidArgument("cube has zero variance; no principal component");

    const auto x = detail::pixel_rows(cube);
    Eigen::VectorXd scores = (x.rowwise() - eig.mean.transpose()) * eig.eigenvectors.col(0);
    const double mean = scores.mean();
    scores.array() -= mean;
    const double sd = std::sqrt(scores.squaredNorm() / static_cast<double>(scores.size() - 1));
    if (!(sd > 0.0)) throw InvalidArgument("cube has zero variance; no principal component");
    scores /= sd;

    GuideImage img;
    img.height = cube.height();
    img.width = cube.width();
    img.values.assign(scores.data(), scores.data() + scores.size());
    return img;
}

double estimate_noise_sigma(const GuideImage& img) {
    std::vector<double> diffs;
    if (img.width > 1) {
        diffs.reserve(static_cast<std::size_t>(img.height) * (img.width - 1));
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c + 1 < img.width; ++c) diffs.push_back(img.at(r, c + 1) - img.at(r, c));
        }
    } else {
        for (int r = 0; r + 1 < img.height; ++r) diffs.push_back(img.at(r + 1, 0) - img.at(r, 0));
    }
    constexpr double kFloor = 1e-6;
    if (diffs.empty()) return kFloor;

    auto median = [](std::vector<double>& v) {
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        double m = v[mid];
        if (v.size() % 2 == 0) {
            m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
        }
        return m;
    };
    const double med = median(diffs);
    for (double& d : diffs) d = std::abs(d - med);
    const double mad = median(diffs);
    return std::max(kFloor, mad / (std::sqrt(2.0) * 0.6745));
}

namespace {

// Number of pixels on the ray from `pixel` along `direction`, including
// the pixel itself, that stay inside the image, capped at `scale`.
int clipped_length(int height, int width, Pixel pixel, int direction, int scale) {
    const Offset step = kDirectionSteps[direction];
    int len = 1;
    while (len < scale) {
        const int r = pixel.row + step.drow * len;
        const int c = pixel.col + step.dcol * len;
        if (r < 0 || r >= height || c < 0 || c >= width) break;
        ++len;
    }
    return len;
}

long cross(Offset a, Offset b, Offset p) {
    return static_cast<long>(b.drow - a.drow) * (p.dcol - a.dcol) -
           static_cast<long>(b.dcol - a.dcol) * (p.drow - a.drow);
}

bool in_triangle(Offset a, Offset b, Offset c, Offset p) {
    const long d1 = cross(a, b, p);
    const long d2 = cross(b, c, p);
    const long d3 = cross(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

}  // namespace

LpaEstimate lpa_directional_estimate(const GuideImage& img, Pixel pixel, int direction, int scale,
                                     double noise_sigma) {
    if (direction < 0 || direction >= kDirections) throw InvalidArgument("LPA direction out of range");
    if (scale < 1) throw InvalidArgument("LPA scale must be >= 1");
    const int len = clipped_length(img.height, img.width, pixel, direction, scale);
    const Offset step = kDirectionSteps[direction];
    double sum = 0.0;
    for (int t = 0; t < len; ++t) sum += img.at(pixel.row + step.drow * t, pixel.col + step.dcol * t);
    return {sum / len, noise_sigma / std::sqrt(static_cast<double>(len))};
}

std::size_t ici_select_scale(std::span<const LpaEstimate> estimates, double gamma) {
    if (estimates.empty()) throw InvalidArgument("ICI needs at least one estimate");
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    std::size_t selected = 0;
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        lower = std::max(lower, estimates[j].estimate - gamma * estimates[j].std);
        upper = std::min(upper, estimates[j].estimate + gamma * estimates[j].std);
        if (lower > upper) break;
        selected = j;
    }
    return selected;
}

std::array<int, kDirections> directional_radii(const GuideImage& img, Pixel pixel, const IciConfig& cfg,
                                               double noise_sigma) {
    std::array<int, kDirections> radii{};
    std::vector<LpaEstimate> estimates(cfg.scales.size());
    for (int d = 0; d < kDirections; ++d) {
        for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
            estimates[s] = lpa_directional_estimate(img, pixel, d, cfg.scales[s], noise_sigma);
        }
        const std::size_t j = ici_select_scale(estimates, cfg.gamma);
        radii[d] = clipped_length(img.height, img.width, pixel, d, cfg.scales[j]) - 1;
    }
    return radii;
}

SaRegion region_from_radii(Pixel center, const std::array<int, kDirections>& radii, int height, int width) {
    const int reach = *std::max_element(radii.begin(), radii.end());
    std::array<Offset, kDirections> vertex;
    for (int d = 0; d < kDirections; ++d) {
        vertex[d] = {kDirectionSteps[d].drow * radii[d], kDirectionSteps[d].dcol * radii[d]};
    }

    SaRegion region;
    region.center = center;
    const Offset origin{0, 0};
    for (int dr = -reach; dr <= reach; ++dr) {
        const int r = center.row + dr;
        if (r < 0 || r >= height) continue;
        for (int dc = -reach; dc <= reach; ++dc) {
            const int c = center.col + dc;
            if (c < 0 || c >= width || (dr == 0 && dc == 0)) continue;
            const Offset p{dr, dc};
            bool inside = false;
            for (int d = 0; d < kDirections && !inside; ++d) {
                const Offset step = kDirectionSteps[d];
                // on ray d within its radius
                const int t = step.drow != 0 ? dr * step.drow : dc * step.dcol;
                if (t >= 1 && t <= radii[d] && dr == step.drow * t && dc == step.dcol * t) inside = true;
                const int e = (d + 1) % kDirections;
                if (!inside && radii[d] > 0 && radii[e] > 0) inside = in_triangle(origin, vertex[d], vertex[e], p);
            }
            if (inside) region.offsets.push_back(p);
        }
    }
    region.offsets.push_back(origin);
    return region;
}

SaRegion sa_region(const GuideImage& img, Pixel pixel, const IciConfig& cfg) {
    cfg.validate();
    if (pixel.row < 0 || pixel.row >= img.height || pixel.col < 0 || pixel.col >= img.width) {
        throw InvalidArgument("pixel outside the guide image");
    }
    const double sigma = cfg.noise_sigma ? *cfg.noise_sigma : estimate_noise_sigma(img);
    return region_from_radii(pixel, directional_radii(img, pixel, cfg, sigma), img.height, img.width);
}

Cube RegionMap::size_map() const {
    Cube out(height, width, 1);
    for (std::size_t i = 0; i < regions.size(); ++i) out.values()[i] = static_cast<double>(regions[i].size());
    return out;
}

RegionMap RegionMap::singletons(int height, int width) {
    RegionMap map;
    map.height = height;
    map.width = width;
    map.regions.resize(static_cast<std::size_t>(height) * width);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            auto& reg = map.regions[static_cast<std::size_t>(r) * width + c];
            reg.center = {r, c};
            reg.offsets = {{0, 0}};
        }
    }
    return map;
}

RegionMap compute_regions(const GuideImage& img, const IciConfig& cfg) {
    cfg.validate();
    IciConfig resolved = cfg;
    if (!resolved.noise_sigma) resolved.noise_sigma = estimate_noise_sigma(img);

    RegionMap map;
    map.height = img.height;
    map.width = img.width;
    map.regions.resize(static_cast<std::size_t>(img.height) * img.width);
    parallel_for(static_cast<std::size_t>(img.height), [&](std::size_t r) {
        for (int c = 0; c < img.width; ++c) {
            map.regions[r * img.width + c] = sa_region(img, {static_cast<int>(r), c}, resolved);
        }
    });
    return map;
}

}  // namespace sarstv
