#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace sarstv {

// 64-bit FNV-1a, used to key stage caches by content.
class Fnv1a {
public:
    Fnv1a& bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    template <typename T>
    Fnv1a& value(const T& v) { return bytes(&v, sizeof(T)); }
    template <typename T>
    Fnv1a& values(std::span<const T> v) { return bytes(v.data(), v.size_bytes()); }
    Fnv1a& text(std::string_view s) {
        value(s.size());
        return bytes(s.data(), s.size());
    }

    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace sarstv
