#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sarstv/error.hpp"
#include "sarstv/svm.hpp"

namespace sarstv {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'R', 'S', 'V', 'M', '0', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_arithmetic_v<T>);
        unsigned char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        bytes.append(reinterpret_cast<const char*>(buf), sizeof(T));
    }
    std::string bytes;
};

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > data_.size()) throw FormatError("SVM model file truncated");
        unsigned char buf[sizeof(T)];
        std::memcpy(buf, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }
    void expect_magic() {
        if (data_.size() < sizeof(kMagic) || std::memcmp(data_.data(), kMagic, sizeof(kMagic)) != 0) {
            throw FormatError("not a sarstv SVM model file");
        }
        pos_ = sizeof(kMagic);
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::string data_;
    std::size_t pos_ = 0;
};

int checked_count(std::int32_t v, const char* what) {
    if (v < 0 || v > (1 << 28)) throw FormatError(std::string("SVM model file: bad ") + what);
    return v;
}

}  // namespace

void store_classifier(const SvmClassifier& clf, const std::filesystem::path& path) {
    Writer w;
    w.bytes.append(kMagic, sizeof(kMagic));
    w.put(kVersion);
    const auto n = static_cast<std::int32_t>(clf.samples.rows());
    const auto d = static_cast<std::int32_t>(clf.samples.cols());
    w.put(static_cast<std::int32_t>(clf.classes));
    w.put(d);
    w.put(n);
    w.put(clf.params.nu);
    w.put(clf.params.gamma);
    for (int j = 0; j < d; ++j) w.put(clf.scaler.mean[j]);
    for (int j = 0; j < d; ++j) w.put(clf.scaler.scale[j]);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) w.put(clf.samples(i, j));
    }
    for (int i = 0; i < n; ++i) w.put(static_cast<std::int32_t>(clf.labels[i]));
    w.put(static_cast<std::int32_t>(clf.models.size()));
    for (const auto& pm : clf.models) {
        w.put(static_cast<std::int32_t>(pm.first));
        w.put(static_cast<std::int32_t>(pm.second));
        w.put(static_cast<std::int32_t>(pm.model.support.size()));
        w.put(pm.model.rho);
        w.put(static_cast<std::uint8_t>(pm.model.has_probability ? 1 : 0));
        w.put(pm.model.platt_a);
        w.put(pm.model.platt_b);
        for (std::size_t s = 0; s < pm.model.support.size(); ++s) {
            w.put(static_cast<std::int32_t>(pm.model.support[s]));
            w.put(pm.model.coef[s]);
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

SvmClassifier load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Reader r(ss.str());
    r.expect_magic();
    if (r.get<std::uint32_t>() != kVersion) throw FormatError("unsupported SVM model version");

    SvmClassifier clf;
    clf.classes = checked_count(r.get<std::int32_t>(), "class count");
    const int d = checked_count(r.get<std::int32_t>(), "feature count");
    const int n = checked_count(r.get<std::int32_t>(), "sample count");
    clf.params.nu = r.get<double>();
    clf.params.gamma = r.get<double>();
    clf.scaler.mean.resize(d);
    clf.scaler.scale.resize(d);
    for (int j = 0; j < d; ++j) clf.scaler.mean[j] = r.get<double>();
    for (int j = 0; j < d; ++j) clf.scaler.scale[j] = r.get<double>();
    clf.samples.resize(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) clf.samples(i, j) = r.get<double>();
    }
    clf.labels.resize(n);
    for (int i = 0; i < n; ++i) clf.labels[i] = r.get<std::int32_t>();
    const int pairs = checked_count(r.get<std::int32_t>(), "pair count");
    if (pairs != clf.classes * (clf.classes - 1) / 2) throw FormatError("SVM model file: pair count does not match K");
    clf.models.resize(pairs);
    for (auto& pm : clf.models) {
        pm.first = r.get<std::int32_t>();
        pm.second = r.get<std::int32_t>();
        const int nsv = checked_count(r.get<std::int32_t>(), "support vector count");
        pm.model.gamma = clf.params.gamma;
        pm.model.rho = r.get<double>();
        pm.model.has_probability = r.get<std::uint8_t>() != 0;
        pm.model.platt_a = r.get<double>();
        pm.model.platt_b = r.get<double>();
        pm.model.support.resize(nsv);
        pm.model.coef.resize(nsv);
        pm.model.support_vectors.resize(nsv, d);
        for (int s = 0; s < nsv; ++s) {
            const int idx = r.get<std::int32_t>();
            if (idx < 0 || idx >= n) throw FormatError("SVM model file: support index out of range");
            pm.model.support[s] = idx;
            pm.model.coef[s] = r.get<double>();
            pm.model.support_vectors.row(s) = clf.samples.row(idx);
        }
    }
    if (!r.done()) throw FormatError("SVM model file has trailing bytes");
    return clf;
}

}  // namespace sarstv
