#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mocsim {

/// 64-bit FNV-1a, incrementally updatable. Integers are fed little-endian so
/// digests are identical across platforms.
class Fnv1a {
public:
    Fnv1a& update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ = (state_ ^ c) * kPrime;
        }
        return *this;
    }

    Fnv1a& update(std::int64_t v) noexcept {
        auto u = static_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            state_ = (state_ ^ (u & 0xffU)) * kPrime;
            u >>= 8;
        }
        return *this;
    }

    [[nodiscard]] std::uint64_t digest() const noexcept { return state_; }

private:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime = 0x100000001b3ULL;
    std::uint64_t state_ = kOffset;
};

[[nodiscard]] inline std::uint64_t fnv1a(std::string_view bytes) noexcept { return Fnv1a{}.update(bytes).digest(); }

/// Sixteen lowercase hex digits.
[[nodiscard]] std::string hex64(std::uint64_t v);

} // namespace mocsim
