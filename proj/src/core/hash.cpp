#include <mocsim/core/hash.hpp>

namespace mocsim {

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xfU];
        v >>= 4;
    }
    return out;
}

} // namespace mocsim
