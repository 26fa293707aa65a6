#include <cmath>
#include <cstring>
#include <set>

#include <gtest/gtest.h>

#include "sarstv/error.hpp"
#include "sarstv/io.hpp"
#include "support.hpp"

using namespace sarstv;

namespace {

std::string f32_bytes(const std::vector<float>& v) {
    std::string out;
    for (float f : v) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
    return out;
}

LabelMap blocks_map(int h, int w, const std::vector<int>& classes_per_col_band) {
    std::vector<int> labels(static_cast<std::size_t>(h) * w);
    const int k = static_cast<int>(classes_per_col_band.size());
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) labels[static_cast<std::size_t>(r) * w + c] = classes_per_col_band[c * k / w];
    return LabelMap::from_labels(h, w, labels);
}

}  // namespace

TEST(LoadCube, ReadsHandWrittenPayload) {
    const auto dir = oracle::temp_dir("io_hand");
    oracle::write_file(dir / "c.json", R"({"height":2,"width":2,"bands":3,"dtype":"f32","interleave":"bsq"})");
    std::vector<float> payload(12);
    for (int i = 0; i < 12; ++i) payload[i] = static_cast<float>(i);
    oracle::write_file(dir / "c.raw", f32_bytes(payload));

    const HsiCube cube = load_cube(dir / "c");
    EXPECT_EQ(cube.height(), 2);
    EXPECT_EQ(cube.width(), 2);
    EXPECT_EQ(cube.bands(), 3);
    EXPECT_EQ(cube.at(0, 0, 0), 0.0);
    EXPECT_EQ(cube.at(1, 1, 2), 11.0);
    // BSQ: band 1 starts at element 4, row-major inside the band.
    EXPECT_EQ(cube.at(0, 1, 1), 5.0);
    EXPECT_EQ(load_cube(dir / "c.json").values(), cube.values());
    EXPECT_EQ(load_cube(dir / "c.raw").values(), cube.values());
}

TEST(LoadCube, StoreRoundTripIsByteIdentical) {
    const auto dir = oracle::temp_dir("io_roundtrip");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> u(-3.0f, 3.0f);
    std::vector<float> payload(5 * 4 * 3);
    for (auto& f : payload) f = u(rng);
    oracle::write_file(dir / "a.json", R"({"height":5,"width":4,"bands":3,"dtype":"f32","interleave":"bsq"})");
    oracle::write_file(dir / "a.raw", f32_bytes(payload));
    store_cube(load_cube(dir / "a"), dir / "b");
    EXPECT_EQ(oracle::read_file(dir / "a.raw"), oracle::read_file(dir / "b.raw"));

    Cube c(3, 2, 2);
    for (std::size_t i = 0; i < c.values().size(); ++i) c.values()[i] = std::sqrt(2.0) * static_cast<double>(i);
    store_cube(c, dir / "d", Dtype::f64);
    EXPECT_EQ(load_cube(dir / "d").values(), c.values());
}

TEST(LoadCube, RejectsBadInputs) {
    const auto dir = oracle::temp_dir("io_bad");
    EXPECT_THROW(load_cube(dir / "missing"), Error);

    oracle::write_file(dir / "corrupt.json", "{not json");
    oracle::write_file(dir / "corrupt.raw", f32_bytes({1.0f}));
    EXPECT_THROW(load_cube(dir / "corrupt"), FormatError);

    oracle::write_file(dir / "short.json", R"({"height":2,"width":2,"bands":1,"dtype":"f32","interleave":"bsq"})");
    oracle::write_file(dir / "short.raw", f32_bytes({1, 2, 3}));
    EXPECT_THROW(load_cube(dir / "short"), FormatError);

    oracle::write_file(dir / "nan.json", R"({"height":1,"width":2,"bands":1,"dtype":"f32","interleave":"bsq"})");
    oracle::write_file(dir / "nan.raw", f32_bytes({1.0f, std::nanf("")}));
    EXPECT_THROW(load_cube(dir / "nan"), Error);

    oracle::write_file(dir / "bip.json", R"({"height":1,"width":1,"bands":1,"dtype":"f32","interleave":"bip"})");
    oracle::write_file(dir / "bip.raw", f32_bytes({1.0f}));
    EXPECT_THROW(load_cube(dir / "bip"), FormatError);

    oracle::write_file(dir / "zero.json", R"({"height":0,"width":1,"bands":1,"dtype":"f32","interleave":"bsq"})");
    oracle::write_file(dir / "zero.raw", "");
    EXPECT_THROW(load_cube(dir / "zero"), FormatError);
}

TEST(LoadLabels, CsvExample) {
    const LabelMap m = parse_labels_csv("0,1\n2,2");
    EXPECT_EQ(m.height, 2);
    EXPECT_EQ(m.width, 2);
    EXPECT_EQ(m.num_classes, 2);
    EXPECT_EQ(m.class_counts()[0], 1u);
    EXPECT_EQ(m.at(1, 0), 2);
}

TEST(LoadLabels, RejectsNegativeAndRagged) {
    EXPECT_THROW(parse_labels_csv("0,-1\n2,2"), FormatError);
    EXPECT_THROW(parse_labels_csv("0,1\n2"), FormatError);
    EXPECT_THROW(parse_labels_csv(""), FormatError);
}

TEST(LoadLabels, PgmSixteenBit) {
    // 3x1 image, maxval 300, big-endian samples 0, 1, 300.
    std::string bytes = "P5\n3 1\n300\n";
    for (int v : {0, 1, 300}) {
        bytes.push_back(static_cast<char>(v >> 8));
        bytes.push_back(static_cast<char>(v & 0xff));
    }
    const LabelMap m = parse_labels_pgm(bytes);
    EXPECT_EQ(m.width, 3);
    EXPECT_EQ(m.labels, (std::vector<int>{0, 1, 300}));
    EXPECT_EQ(m.num_classes, 300);
}

TEST(LoadLabels, FileRoundTripsAndGridCheck) {
    const auto dir = oracle::temp_dir("io_labels");
    const LabelMap m = LabelMap::from_labels(2, 3, {0, 1, 2, 3, 3, 1});
    store_labels_csv(m, dir / "l.csv");
    store_labels_pgm(m, dir / "l.pgm");
    EXPECT_EQ(load_labels(dir / "l.csv").labels, m.labels);
    EXPECT_EQ(load_labels(dir / "l.pgm").labels, m.labels);
    EXPECT_NO_THROW(check_same_grid(m, Cube(2, 3, 4)));
    EXPECT_THROW(check_same_grid(m, Cube(3, 2, 4)), InvalidArgument);
}

TEST(SampleTrainingSet, DeterministicPerSeed) {
    const LabelMap m = blocks_map(20, 20, {1, 2, 3, 4});  // 100 pixels per class
    const TrainingSet a = sample_training_set(m, 5, 11);
    const TrainingSet b = sample_training_set(m, 5, 11);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.size(), 20u);
    std::vector<int> hist(5, 0);
    for (const auto& s : a.samples) {
        ++hist[s.cls];
        EXPECT_EQ(m.at(s.row, s.col), s.cls);
    }
    EXPECT_EQ(hist, (std::vector<int>{0, 5, 5, 5, 5}));
}

TEST(SampleTrainingSet, SmallClassContributesAll) {
    // Class 1 has 20 pixels, class 2 has 80.
    std::vector<int> labels(100, 2);
    for (int i = 0; i < 20; ++i) labels[i * 5] = 1;
    const LabelMap m = LabelMap::from_labels(10, 10, labels);
    const TrainingSet t = sample_training_set(m, 30, 3);
    int ones = 0, twos = 0;
    for (const auto& s : t.samples) (s.cls == 1 ? ones : twos)++;
    EXPECT_EQ(ones, 20);
    EXPECT_EQ(twos, 30);
}

TEST(SampleTrainingSet, SeedsDifferAndPositionsDistinct) {
    const LabelMap m = blocks_map(20, 20, {1, 2, 3});
    const TrainingSet base = sample_training_set(m, 10, 0);
    bool any_diff = false;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const TrainingSet t = sample_training_set(m, 10, seed);
        any_diff = any_diff || t.samples != base.samples;
        std::set<std::pair<int, int>> pos;
        for (const auto& s : t.samples) pos.insert({s.row, s.col});
        EXPECT_EQ(pos.size(), t.size());
    }
    EXPECT_TRUE(any_diff);
}

TEST(SampleTrainingSet, RejectsEmptyClassAndBadCount) {
    const LabelMap gap = LabelMap::from_labels(1, 3, {1, 3, 3});
    EXPECT_THROW(sample_training_set(gap, 2, 0), InvalidArgument);
    const LabelMap ok = LabelMap::from_labels(1, 2, {1, 2});
    EXPECT_THROW(sample_training_set(ok, 0, 0), InvalidArgument);
}

TEST(SynthCube, NoiselessPixelsEqualEndmembers) {
    const SynthScene s = synth_cube(stripe_layout(6, 8, 2), 5, 0.0, 1);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 8; ++c) {
            const int k = s.labels.at(r, c);
            ASSERT_GE(k, 1);
            const auto spec = s.cube.spectrum(r, c);
            for (int b = 0; b < 5; ++b) EXPECT_EQ(spec[b], s.endmembers[k - 1][b]);
        }
    }
}

TEST(SynthCube, ReproducibleWithSeed) {
    const auto a = synth_cube(stripe_layout(10, 10, 3), 4, 0.1, 42);
    const auto b = synth_cube(stripe_layout(10, 10, 3), 4, 0.1, 42);
    const auto c = synth_cube(stripe_layout(10, 10, 3), 4, 0.1, 43);
    EXPECT_EQ(a.cube.values(), b.cube.values());
    EXPECT_NE(a.cube.values(), c.cube.values());
}

TEST(SynthCube, BlockLabelsMatchLayout) {
    SynthLayout layout{30, 30, {{0, 0, 30, 10, 1}, {0, 10, 15, 20, 2}, {15, 10, 15, 20, 3}}, {}};
    const auto s = synth_cube(layout, 6, 0.05, 5);
    EXPECT_EQ(s.labels.num_classes, 3);
    for (int r = 0; r < 30; ++r) {
        for (int c = 0; c < 30; ++c) {
            const int expected = c < 10 ? 1 : (r < 15 ? 2 : 3);
            EXPECT_EQ(s.labels.at(r, c), expected);
        }
    }
}

TEST(SynthCube, RejectsOverlap) {
    SynthLayout layout{4, 4, {{0, 0, 3, 3, 1}, {2, 2, 2, 2, 2}}, {}};
    EXPECT_THROW(synth_cube(layout, 3, 0.0, 0), InvalidArgument);
}

TEST(SynthCube, GapMatchesDirectDistance) {
    const auto e = default_endmembers(3, 20);
    double best = 1e300;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            double s = 0.0;
            for (int b = 0; b < 20; ++b) s += (e[i][b] - e[j][b]) * (e[i][b] - e[j][b]);
            best = std::min(best, std::sqrt(s / 20.0));
        }
    EXPECT_NEAR(interclass_gap(e), best, 1e-15);
    EXPECT_NEAR(e[0][0], 0.5 + 0.4 * std::sin(M_PI * 1 * 0.5 / 20 + 0.7), 1e-15);
}
