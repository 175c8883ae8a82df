#pragma once

#include <cstdint>
#include <initializer_list>
#include <concepts>
#include <string_view>

namespace ddopt {

// A tag component for deriving a stream key: either a label or an integer.
struct RngTag {
    RngTag(std::string_view s) : label(s), is_label(true) {}
    RngTag(const char* s) : label(s), is_label(true) {}
    template <std::integral I>
    RngTag(I v) : number(static_cast<std::uint64_t>(v)) {}

    std::string_view label;
    std::uint64_t number = 0;
    bool is_label = false;
};

// Counter-based random stream. Draw k is a pure function of (key, k), so a
// stream is reproducible across platforms and independent of scheduling.
// The mixing function is the SplitMix64 finalizer.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double next_double();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
    // Unbiased uniform integer in [0, bound); bound > 0.
    std::uint64_t next_index(std::uint64_t bound);
    bool bernoulli(double prob) { return next_double() < prob; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream from a seed and a tuple of tags, e.g.
// rng_stream(seed, {"sdca", t, p, q}).
RngStream rng_stream(std::uint64_t seed, std::initializer_list<RngTag> tags);

}  // namespace ddopt
