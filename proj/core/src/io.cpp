#include "sarstv/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sarstv/error.hpp"
#include "sarstv/random.hpp"

namespace sarstv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

template <typename U>
U swap_bytes(U v) {
    if constexpr (sizeof(U) == 4) {
        return __builtin_bswap32(v);
    } else {
        return __builtin_bswap64(v);
    }
}

template <typename T>
T from_little_endian(const char* p) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits;
    std::memcpy(&bits, p, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
    return std::bit_cast<T>(bits);
}

template <typename T>
void append_little_endian(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits = std::bit_cast<U>(value);
    if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
    char buf[sizeof(U)];
    std::memcpy(buf, &bits, sizeof(U));
    out.append(buf, sizeof(U));
}

int header_int(const json& h, const char* key, const fs::path& path) {
    if (!h.contains(key) || !h[key].is_number_integer()) {
        throw FormatError(path.string() + ": header field '" + key + "' missing or not an integer");
    }
    const auto v = h[key].get<long long>();
    if (v < 1 || v > (1LL << 30)) throw FormatError(path.string() + ": header field '" + key + "' out of range");
    return static_cast<int>(v);
}

}  // namespace

CubePaths cube_paths(const fs::path& path) {
    fs::path stem = path;
    const auto ext = path.extension().string();
    if (ext == ".json" || ext == ".raw") stem.replace_extension();
    CubePaths p;
    p.header = stem;
    p.header += ".json";
    p.payload = stem;
    p.payload += ".raw";
    return p;
}

HsiCube load_cube(const fs::path& path) {
    const auto paths = cube_paths(path);
    json h;
    try {
        h = json::parse(read_file(paths.header));
    } catch (const json::exception& e) {
        throw FormatError(paths.header.string() + ": corrupt header: " + e.what());
    }
    if (!h.is_object()) throw FormatError(paths.header.string() + ": header is not a JSON object");
    const int height = header_int(h, "height", paths.header);
    const int width = header_int(h, "width", paths.header);
    const int bands = header_int(h, "bands", paths.header);
    const std::string dtype = h.value("dtype", "f32");
    const std::string interleave = h.value("interleave", "bsq");
    if (interleave != "bsq") throw FormatError(paths.header.string() + ": unsupported interleave '" + interleave + "'");
    std::size_t width_bytes;
    if (dtype == "f32") {
        width_bytes = 4;
    } else if (dtype == "f64") {
        width_bytes = 8;
    } else {
        throw FormatError(paths.header.string() + ": unsupported dtype '" + dtype + "'");
    }

    const std::string payload = read_file(paths.payload);
    const std::size_t count = static_cast<std::size_t>(height) * width * bands;
    if (payload.size() != count * width_bytes) {
        throw FormatError(paths.payload.string() + ": payload is " + std::to_string(payload.size()) +
                          " bytes, header implies " + std::to_string(count * width_bytes));
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = width_bytes == 4 ? static_cast<double>(from_little_endian<float>(payload.data() + 4 * i))
                                     : from_little_endian<double>(payload.data() + 8 * i);
    }
    HsiCube cube(height, width, bands, std::move(values));
    try {
        cube.check_finite();
    } catch (const InvalidArgument& e) {
        throw FormatError(paths.payload.string() + ": " + e.what());
    }
    return cube;
}

void store_cube(const Cube& cube, const fs::path& path, Dtype dtype, const std::string& extra_header_json) {
    const auto paths = cube_paths(path);
    json h = extra_header_json.empty() ? json::object() : json::parse(extra_header_json);
    h["height"] = cube.height();
    h["width"] = cube.width();
    h["bands"] = cube.bands();
    h["dtype"] = dtype == Dtype::f32 ? "f32" : "f64";
    h["interleave"] = "bsq";

    std::string payload;
    payload.reserve(cube.values().size() * (dtype == Dtype::f32 ? 4 : 8));
    for (double v : cube.values()) {
        if (dtype == Dtype::f32) {
            append_little_endian(payload, static_cast<float>(v));
        } else {
            append_little_endian(payload, v);
        }
    }
    write_file(paths.header, h.dump() + "\n");
    write_file(paths.payload, payload);
}

LabelMap parse_labels_csv(const std::string& text) {
    std::vector<int> labels;
    int height = 0;
    int width = -1;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        int cols = 0;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            std::size_t used = 0;
            long v;
            try {
                v = std::stol(cell, &used);
            } catch (const std::exception&) {
                throw FormatError("label CSV row " + std::to_string(height + 1) + ": not an integer: '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t", used) != std::string::npos) {
                throw FormatError("label CSV row " + std::to_string(height + 1) + ": not an integer: '" + cell + "'");
            }
            if (v < 0) throw FormatError("label CSV contains negative label " + std::to_string(v));
            labels.push_back(static_cast<int>(v));
            ++cols;
        }
        if (width < 0) width = cols;
        if (cols != width) {
            throw FormatError("label CSV row " + std::to_string(height + 1) + " has " + std::to_string(cols) +
                              " entries, expected " + std::to_string(width));
        }
        ++height;
    }
    if (height == 0 || width <= 0) throw FormatError("label CSV is empty");
    return LabelMap::from_labels(height, width, std::move(labels));
}

LabelMap parse_labels_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(start, pos - start);
    };
    if (next_token() != "P5") throw FormatError("label PGM: missing P5 magic");
    long width = 0, height = 0, maxval = 0;
    try {
        width = std::stol(next_token());
        height = std::stol(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw FormatError("label PGM: malformed header");
    }
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw FormatError("label PGM: bad header values");
    ++pos;  // single whitespace byte before the raster
    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() < pos || bytes.size() - pos != count * sample_bytes) {
        throw FormatError("label PGM: raster length mismatch");
    }
    std::vector<int> labels(count);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t i = 0; i < count; ++i) {
        labels[i] = sample_bytes == 2 ? (p[2 * i] << 8) | p[2 * i + 1] : p[i];
    }
    return LabelMap::from_labels(static_cast<int>(height), static_cast<int>(width), std::move(labels));
}

LabelMap load_labels(const fs::path& path) {
    const std::string bytes = read_file(path);
    try {
        if (path.extension() == ".pgm" || bytes.rfind("P5", 0) == 0) return parse_labels_pgm(bytes);
        return parse_labels_csv(bytes);
    } catch (const InvalidArgument& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void store_labels_csv(const LabelMap& labels, const fs::path& path) {
    std::string out;
    for (int r = 0; r < labels.height; ++r) {
        for (int c = 0; c < labels.width; ++c) {
            if (c) out += ',';
            out += std::to_string(labels.at(r, c));
        }
        out += '\n';
    }
    write_file(path, out);
}

void store_labels_pgm(const LabelMap& labels, const fs::path& path) {
    const int maxval = std::max(labels.num_classes, 1);
    const bool wide = maxval > 255;
    std::string out = "P5\n" + std::to_string(labels.width) + " " + std::to_string(labels.height) + "\n" +
                      std::to_string(wide ? std::max(maxval, 256) : maxval) + "\n";
    for (int l : labels.labels) {
        if (wide) out += static_cast<char>((l >> 8) & 0xff);
        out += static_cast<char>(l & 0xff);
    }
    write_file(path, out);
}

void check_same_grid(const LabelMap& labels, const HsiCube& cube) {
    if (labels.height != cube.height() || labels.width != cube.width()) {
        throw InvalidArgument("label map is " + std::to_string(labels.height) + "x" + std::to_string(labels.width) +
                              " but cube is " + std::to_string(cube.height()) + "x" + std::to_string(cube.width()));
    }
}

TrainingSet sample_training_set(const LabelMap& labels, int per_class, std::uint64_t seed) {
    if (per_class < 1) throw InvalidArgument("per_class must be at least 1");
    if (labels.num_classes < 1) throw InvalidArgument("label map has no labeled pixels");

    std::vector<std::vector<std::size_t>> members(labels.num_classes + 1);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        if (labels.labels[i] > 0) members[labels.labels[i]].push_back(i);
    }

    TrainingSet set;
    set.seed = seed;
    set.per_class = per_class;
    Rng rng(seed);
    for (int k = 1; k <= labels.num_classes; ++k) {
        auto& idx = members[k];
        if (idx.empty()) throw InvalidArgument("class " + std::to_string(k) + " has no labeled pixels");
        const std::size_t take = std::min<std::size_t>(per_class, idx.size());
        rng.partial_shuffle(std::span<std::size_t>(idx), take);
        for (std::size_t t = 0; t < take; ++t) {
            set.samples.push_back({static_cast<int>(idx[t] / labels.width), static_cast<int>(idx[t] % labels.width), k});
        }
    }
    return set;
}

std::vector<std::vector<double>> default_endmembers(int classes, int bands) {
    std::vector<std::vector<double>> e(classes, std::vector<double>(bands));
    for (int k = 1; k <= classes; ++k) {
        for (int b = 0; b < bands; ++b) {
            e[k - 1][b] = 0.5 + 0.4 * std::sin(std::numbers::pi * k * (b + 0.5) / bands + 0.7 * k);
        }
    }
    return e;
}

double interclass_gap(const std::vector<std::vector<double>>& endmembers) {
    if (endmembers.size() < 2) throw InvalidArgument("interclass_gap needs at least two endmembers");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < endmembers.size(); ++i) {
        for (std::size_t j = i + 1; j < endmembers.size(); ++j) {
            double ss = 0.0;
            for (std::size_t b = 0; b < endmembers[i].size(); ++b) {
                const double d = endmembers[i][b] - endmembers[j][b];
                ss += d * d;
            }
            best = std::min(best, std::sqrt(ss / static_cast<double>(endmembers[i].size())));
        }
    }
    return best;
}

SynthLayout stripe_layout(int height, int width, int classes) {
    if (classes < 1 || classes > width) throw InvalidArgument("stripe_layout: need 1 <= classes <= width");
    SynthLayout layout;
    layout.height = height;
    layout.width = width;
    for (int k = 0; k < classes; ++k) {
        const int c0 = k * width / classes;
        const int c1 = (k + 1) * width / classes;
        layout.blocks.push_back({0, c0, height, c1 - c0, k + 1});
    }
    return layout;
}

SynthScene synth_cube(const SynthLayout& layout, int bands, double noise_sigma, std::uint64_t seed) {
    if (layout.height < 1 || layout.width < 1 || bands < 1) throw InvalidArgument("synth_cube: bad dimensions");
    if (noise_sigma < 0.0) throw InvalidArgument("synth_cube: noise_sigma must be nonnegative");

    std::vector<int> labels(static_cast<std::size_t>(layout.height) * layout.width, 0);
    int classes = 0;
    for (const auto& blk : layout.blocks) {
        if (blk.cls < 1) throw InvalidArgument("synth_cube: block class must be >= 1");
        if (blk.rows < 1 || blk.cols < 1 || blk.row < 0 || blk.col < 0 || blk.row + blk.rows > layout.height ||
            blk.col + blk.cols > layout.width) {
            throw InvalidArgument("synth_cube: block outside the grid");
        }
        for (int r = blk.row; r < blk.row + blk.rows; ++r) {
            for (int c = blk.col; c < blk.col + blk.cols; ++c) {
                int& slot = labels[static_cast<std::size_t>(r) * layout.width + c];
                if (slot != 0) throw InvalidArgument("synth_cube: overlapping blocks at (" + std::to_string(r) + "," +
                                                     std::to_string(c) + ")");
                slot = blk.cls;
            }
        }
        classes = std::max(classes, blk.cls);
    }

    SynthScene scene;
    scene.endmembers = layout.endmembers.empty() ? default_endmembers(classes, bands) : layout.endmembers;
    if (static_cast<int>(scene.endmembers.size()) < classes) {
        throw InvalidArgument("synth_cube: fewer endmembers than classes");
    }
    for (const auto& e : scene.endmembers) {
        if (static_cast<int>(e.size()) != bands) throw InvalidArgument("synth_cube: endmember length != bands");
    }

    scene.cube = HsiCube(layout.height, layout.width, bands);
    Rng rng(seed);
    for (int r = 0; r < layout.height; ++r) {
        for (int c = 0; c < layout.width; ++c) {
            const int cls = labels[static_cast<std::size_t>(r) * layout.width + c];
            for (int b = 0; b < bands; ++b) {
                const double base = cls > 0 ? scene.endmembers[cls - 1][b] : 0.0;
                scene.cube.at(r, c, b) = noise_sigma > 0.0 ? base + noise_sigma * rng.normal() : base;
            }
        }
    }
    scene.labels = LabelMap::from_labels(layout.height, layout.width, std::move(labels));
    return scene;
}

}  // namespace sarstv
