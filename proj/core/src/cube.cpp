#include "sarstv/cube.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sarstv/error.hpp"

namespace sarstv {

Cube::Cube(int height, int width, int bands)
    : Cube(height, width, bands,
           std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0) *
                               std::max(bands, 0))) {}

Cube::Cube(int height, int width, int bands, std::vector<double> values)
    : height_(height), width_(width), bands_(bands), values_(std::move(values)) {
    if (height < 1 || width < 1 || bands < 1) {
        throw InvalidArgument("cube dimensions must be positive, got " + std::to_string(height) + "x" +
                              std::to_string(width) + "x" + std::to_string(bands));
    }
    if (values_.size() != static_cast<std::size_t>(height) * width * bands) {
        throw InvalidArgument("cube payload has " + std::to_string(values_.size()) + " values, expected " +
                              std::to_string(static_cast<std::size_t>(height) * width * bands));
    }
}

std::span<double> Cube::band(int b) {
    return {values_.data() + static_cast<std::size_t>(b) * pixels(), pixels()};
}

std::span<const double> Cube::band(int b) const {
    return {values_.data() + static_cast<std::size_t>(b) * pixels(), pixels()};
}

std::vector<double> Cube::spectrum(int row, int col) const {
    std::vector<double> s(bands_);
    for (int b = 0; b < bands_; ++b) s[b] = at(row, col, b);
    return s;
}

void Cube::set_spectrum(int row, int col, std::span<const double> s) {
    for (int b = 0; b < bands_; ++b) at(row, col, b) = s[b];
}

std::vector<double> Cube::to_pixel_major() const {
    const std::size_t n = pixels();
    std::vector<double> out(values_.size());
    for (int b = 0; b < bands_; ++b) {
        const double* src = values_.data() + static_cast<std::size_t>(b) * n;
        for (std::size_t p = 0; p < n; ++p) out[p * bands_ + b] = src[p];
    }
    return out;
}

Cube Cube::from_pixel_major(int height, int width, int bands, std::span<const double> data) {
    Cube c(height, width, bands);
    const std::size_t n = c.pixels();
    for (int b = 0; b < bands; ++b) {
        double* dst = c.values_.data() + static_cast<std::size_t>(b) * n;
        for (std::size_t p = 0; p < n; ++p) dst[p] = data[p * bands + b];
    }
    return c;
}

void Cube::check_finite() const {
    const auto bad = std::find_if(values_.begin(), values_.end(), [](double v) { return !std::isfinite(v); });
    if (bad != values_.end()) {
        throw InvalidArgument("cube contains a non-finite value at flat index " +
                              std::to_string(bad - values_.begin()));
    }
}

std::vector<std::size_t> LabelMap::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes) + 1, 0);
    for (int l : labels) ++counts[l];
    return counts;
}

LabelMap LabelMap::from_labels(int height, int width, std::vector<int> labels) {
    if (height < 1 || width < 1) throw InvalidArgument("label map dimensions must be positive");
    if (labels.size() != static_cast<std::size_t>(height) * width) {
        throw InvalidArgument("label map has " + std::to_string(labels.size()) + " entries, expected " +
                              std::to_string(static_cast<std::size_t>(height) * width));
    }
    LabelMap map;
    map.height = height;
    map.width = width;
    for (int l : labels) {
        if (l < 0) throw InvalidArgument("negative label " + std::to_string(l));
        map.num_classes = std::max(map.num_classes, l);
    }
    map.labels = std::move(labels);
    return map;
}

std::vector<unsigned char> TrainingSet::mask(int height, int width) const {
    std::vector<unsigned char> m(static_cast<std::size_t>(height) * width, 0);
    for (const auto& s : samples) m[static_cast<std::size_t>(s.row) * width + s.col] = 1;
    return m;
}

}  // namespace sarstv
