#include "ddopt/rng.hpp"

#include "ddopt/core.hpp"

namespace ddopt {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::next_index(std::uint64_t bound) {
    if (bound == 0) throw Error(Errc::InvalidArgument, "next_index needs a positive bound");
    // Lemire's multiply-shift with rejection.
    unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            prod = static_cast<unsigned __int128>(next_u64()) * bound;
            low = static_cast<std::uint64_t>(prod);
        }
    }
    return static_cast<std::uint64_t>(prod >> 64);
}

RngStream rng_stream(std::uint64_t seed, std::initializer_list<RngTag> tags) {
    std::uint64_t key = mix64(seed ^ 0x6A09E667F3BCC908ull);
    for (const auto& tag : tags) {
        const std::uint64_t v = tag.is_label ? fnv1a(tag.label) : mix64(tag.number + kGolden);
        key = mix64(key ^ (v + kGolden + (key << 6) + (key >> 2)));
    }
    return RngStream(key);
}

}  // namespace ddopt
