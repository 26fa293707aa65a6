#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sarstv/cube.hpp"
#include "sarstv/metrics.hpp"

namespace sarstv {

using Rgb = std::array<std::uint8_t, 3>;
static_assert(sizeof(Rgb) == 3, "Rgb rows are handed to libpng as packed bytes");

// Class k (1-based) is drawn with kClassPalette[(k - 1) % 20]; label 0 and
// masked pixels are black.
inline constexpr std::array<Rgb, 20> kClassPalette{{
    {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},   {245, 130, 48},
    {145, 30, 180},  {70, 240, 240},  {240, 50, 230},  {210, 245, 60},  {250, 190, 212},
    {0, 128, 128},   {220, 190, 255}, {170, 110, 40},  {255, 250, 200}, {128, 0, 0},
    {170, 255, 195}, {128, 128, 0},   {255, 215, 180}, {0, 0, 128},     {128, 128, 128},
}};

// Heat ramp for misclassification counts: count / trials is interpolated
// linearly through these anchors (0 -> first, 1 -> last).
inline constexpr std::array<Rgb, 5> kHeatRamp{{
    {49, 54, 149}, {116, 173, 209}, {255, 255, 191}, {244, 109, 67}, {165, 0, 38},
}};

Rgb heat_color(int count, int trials);

/// 8-bit RGB PNG, zlib level 9, no ancillary chunks: identical input gives
/// identical bytes.
std::vector<std::uint8_t> encode_png(int width, int height, const std::vector<Rgb>& pixels);

/// Optional mask: pixels with mask[i] == 0 are drawn black.
std::vector<std::uint8_t> render_map(const LabelMap& map, const std::vector<unsigned char>* mask = nullptr);
std::vector<std::uint8_t> render_heatmap(const Heatmap& heatmap);

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace sarstv
