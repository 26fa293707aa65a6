#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sarstv {

// Reproducible random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; every derived draw below is
// implemented here (not via std:: distributions, which are
// implementation-defined) so a seed yields the same samples everywhere.
//
//   uniform_index(n): rejection sampling on the raw 64-bit output, keeping
//                     draws below the largest multiple of n, then x % n.
//   uniform01():      top 53 bits scaled by 2^-53, in [0, 1).
//   normal():         Box-Muller on two uniform01() draws, both outputs used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    std::uint64_t uniform_index(std::uint64_t n);
    double uniform01();
    double normal();

    /// Partial Fisher-Yates: the first k entries become a uniform sample
    /// without replacement, in draw order.
    template <typename T>
    void partial_shuffle(std::span<T> items, std::size_t k) {
        const std::size_t n = items.size();
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace sarstv
