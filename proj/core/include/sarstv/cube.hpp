#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sarstv {

struct Pixel {
    int row = 0;
    int col = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Dense M x N x B array of doubles in band-sequential order:
//   values[b * height * width + row * width + col]
// Used for the radiance cube X, reconstructed/reduced cubes, and any
// single- or multi-band raster written in the header+raw convention.
class Cube {
public:
    Cube() = default;
    Cube(int height, int width, int bands);
    Cube(int height, int width, int bands, std::vector<double> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int bands() const noexcept { return bands_; }
    std::size_t pixels() const noexcept { return static_cast<std::size_t>(height_) * width_; }
    bool empty() const noexcept { return values_.empty(); }

    double& at(int row, int col, int band) { return values_[index(row, col, band)]; }
    double at(int row, int col, int band) const { return values_[index(row, col, band)]; }

    std::span<double> band(int b);
    std::span<const double> band(int b) const;

    /// Copies the spectrum of one pixel (length B).
    std::vector<double> spectrum(int row, int col) const;
    void set_spectrum(int row, int col, std::span<const double> s);

    /// Pixel-interleaved copy: out[p * B + b] with p = row * width + col.
    std::vector<double> to_pixel_major() const;
    static Cube from_pixel_major(int height, int width, int bands, std::span<const double> data);

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    /// Throws InvalidArgument if any value is NaN or infinite.
    void check_finite() const;

private:
    std::size_t index(int row, int col, int band) const noexcept {
        return (static_cast<std::size_t>(band) * height_ + row) * width_ + col;
    }

    int height_ = 0;
    int width_ = 0;
    int bands_ = 0;
    std::vector<double> values_;
};

/// The raw input X.
using HsiCube = Cube;

/// M x N x K stack of per-class maps (V before smoothing, U after), one
/// band per class in ascending class order; band k holds class k + 1.
struct ProbabilityTensor {
    Cube data;

    ProbabilityTensor() = default;
    explicit ProbabilityTensor(Cube c) : data(std::move(c)) {}
    ProbabilityTensor(int height, int width, int classes) : data(height, width, classes) {}

    int height() const noexcept { return data.height(); }
    int width() const noexcept { return data.width(); }
    int classes() const noexcept { return data.bands(); }
    double& at(int row, int col, int k) { return data.at(row, col, k); }
    double at(int row, int col, int k) const { return data.at(row, col, k); }
    std::span<double> channel(int k) { return data.band(k); }
    std::span<const double> channel(int k) const { return data.band(k); }
};

/// Ground-truth or predicted class map; 0 marks an unlabeled pixel.
struct LabelMap {
    int height = 0;
    int width = 0;
    int num_classes = 0;  // K = max label present
    std::vector<int> labels;  // row-major

    int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
    std::size_t pixels() const noexcept { return labels.size(); }

    /// Number of pixels carrying each label; index 0 counts unlabeled pixels.
    std::vector<std::size_t> class_counts() const;

    static LabelMap from_labels(int height, int width, std::vector<int> labels);
};

struct LabeledPixel {
    int row = 0;
    int col = 0;
    int cls = 0;

    friend bool operator==(const LabeledPixel&, const LabeledPixel&) = default;
};

/// The training set drawn from a LabelMap.
struct TrainingSet {
    std::vector<LabeledPixel> samples;
    unsigned long long seed = 0;
    int per_class = 0;

    std::size_t size() const noexcept { return samples.size(); }
    /// Row-major mask of training positions for an image of the given size.
    std::vector<unsigned char> mask(int height, int width) const;
};

}  // namespace sarstv
