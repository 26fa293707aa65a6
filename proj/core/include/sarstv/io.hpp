#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sarstv/cube.hpp"

namespace sarstv {

// ---------------------------------------------------------------------------
// Cube files
//
// A cube named <name> is stored as two files:
//   <name>.json  {"height":M,"width":N,"bands":B,"dtype":"f32","interleave":"bsq"}
//   <name>.raw   M*N*B little-endian values, band-sequential, row-major
//                within each band.
// "dtype" is "f32" for image data; "f64" is accepted for model payloads that
// need full precision. Extra header keys are preserved on read and ignored.
// ---------------------------------------------------------------------------

enum class Dtype { f32, f64 };

struct CubePaths {
    std::filesystem::path header;
    std::filesystem::path payload;
};

/// Accepts "<name>", "<name>.json" or "<name>.raw".
CubePaths cube_paths(const std::filesystem::path& path);

HsiCube load_cube(const std::filesystem::path& path);
void store_cube(const Cube& cube, const std::filesystem::path& path, Dtype dtype = Dtype::f32,
                const std::string& extra_header_json = {});

// ---------------------------------------------------------------------------
// Label maps: CSV (M lines of N comma-separated integers) or binary PGM (P5).
// ---------------------------------------------------------------------------

LabelMap load_labels(const std::filesystem::path& path);
LabelMap parse_labels_csv(const std::string& text);
LabelMap parse_labels_pgm(const std::string& bytes);

void store_labels_csv(const LabelMap& labels, const std::filesystem::path& path);
/// 16-bit P5 when the largest label exceeds 255, otherwise 8-bit.
void store_labels_pgm(const LabelMap& labels, const std::filesystem::path& path);

/// Throws InvalidArgument when the label map and cube disagree on M or N.
void check_same_grid(const LabelMap& labels, const HsiCube& cube);

// ---------------------------------------------------------------------------
// Training-set sampling
//
// For each class k = 1..K in ascending order, the row-major indices of its
// labeled pixels are partially Fisher-Yates shuffled by one Rng(seed) stream
// and the first min(per_class, n_k) are kept. Samples are returned grouped
// by class, in draw order.
// ---------------------------------------------------------------------------

TrainingSet sample_training_set(const LabelMap& labels, int per_class, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

struct Block {
    int row = 0;
    int col = 0;
    int rows = 0;
    int cols = 0;
    int cls = 1;
};

struct SynthLayout {
    int height = 0;
    int width = 0;
    std::vector<Block> blocks;
    /// Optional class spectra, endmembers[k - 1] for class k. When empty,
    /// default_endmembers() is used.
    std::vector<std::vector<double>> endmembers;
};

struct SynthScene {
    HsiCube cube;
    LabelMap labels;
    std::vector<std::vector<double>> endmembers;
};

/// e_k[b] = 0.5 + 0.4 * sin(pi * k * (b + 0.5) / B + 0.7 * k), k = 1..K.
std::vector<std::vector<double>> default_endmembers(int classes, int bands);

/// Smallest RMS per-band distance between two endmembers:
/// min_{i != j} ||e_i - e_j||_2 / sqrt(B).
double interclass_gap(const std::vector<std::vector<double>>& endmembers);

/// K vertical stripes of (nearly) equal width covering the whole grid.
SynthLayout stripe_layout(int height, int width, int classes);

/// Pixels covered by a block get their class endmember plus i.i.d.
/// N(0, noise_sigma^2) per band; uncovered pixels are unlabeled and carry
/// pure noise around zero.
SynthScene synth_cube(const SynthLayout& layout, int bands, double noise_sigma, std::uint64_t seed);

}  // namespace sarstv
