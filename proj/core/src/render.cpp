#include "sarstv/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sarstv/error.hpp"

namespace sarstv {

Rgb heat_color(int count, int trials) {
    const double t = trials > 0 ? std::clamp(static_cast<double>(count) / trials, 0.0, 1.0) : 0.0;
    const double pos = t * (kHeatRamp.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, kHeatRamp.size() - 1);
    const double f = pos - static_cast<double>(lo);
    Rgb out;
    for (int ch = 0; ch < 3; ++ch) {
        out[ch] = static_cast<std::uint8_t>(std::lround((1.0 - f) * kHeatRamp[lo][ch] + f * kHeatRamp[hi][ch]));
    }
    return out;
}

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(int width, int height, const std::vector<Rgb>& pixels) {
    if (width < 1 || height < 1 || pixels.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidArgument("encode_png: pixel count does not match dimensions");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(height);
    // libpng reports errors by longjmp; nothing with a destructor is
    // created between here and the end of the write.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encoding failed");
    }
    png_set_write_fn(png, &out, append_bytes, flush_noop);
    png_set_compression_level(png, 9);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    auto* base = const_cast<std::uint8_t*>(pixels.front().data());
    for (int r = 0; r < height; ++r) rows[r] = base + static_cast<std::size_t>(r) * width * 3;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

std::vector<std::uint8_t> render_map(const LabelMap& map, const std::vector<unsigned char>* mask) {
    std::vector<Rgb> px(map.labels.size(), Rgb{0, 0, 0});
    for (std::size_t i = 0; i < px.size(); ++i) {
        const int l = map.labels[i];
        if (l > 0 && (!mask || (*mask)[i])) px[i] = kClassPalette[(l - 1) % kClassPalette.size()];
    }
    return encode_png(map.width, map.height, px);
}

std::vector<std::uint8_t> render_heatmap(const Heatmap& heatmap) {
    std::vector<Rgb> px(heatmap.counts.size(), Rgb{0, 0, 0});
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (heatmap.mask[i]) px[i] = heat_color(heatmap.counts[i], heatmap.trials);
    }
    return encode_png(heatmap.width, heatmap.height, px);
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

}  // namespace sarstv
