#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace xlb {

// Counter-based deterministic PRNG.
//
// A stream key is derived by absorbing the seed plus arbitrary domain tags
// (strings) and indices (u64) through splitmix64-style mixing. The stream
// itself is stateless: output i = mix64(key + (i+1) * GOLDEN_GAMMA), so any
// draw is addressable by (key, counter) alone and draws for distinct keys
// are independent of evaluation order.
//
// Same-binary runs are bit-identical. Other implementations of the file
// formats reproduce these streams only if they adopt this exact scheme;
// statistical fixtures, not bytes, are the cross-implementation contract.

uint64_t mix64(uint64_t x);

class RngKey {
public:
    explicit RngKey(uint64_t seed);
    RngKey absorb(uint64_t v) const;
    RngKey absorb(std::string_view tag) const;
    uint64_t value() const noexcept { return state_; }

private:
    uint64_t state_;
};

class StreamRng {
public:
    explicit StreamRng(RngKey key) : key_(key.value()), counter_(0) {}

    uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_double();
    // Uniform in [0, bound); bound > 0. Modulo reduction (bias is
    // irrelevant at these scales and keeps the scheme trivially portable).
    uint64_t next_below(uint64_t bound);
    // Standard normal via Box-Muller; one value per call, pairs cached.
    double next_normal();

    std::vector<double> normal_vector(std::size_t n);

private:
    uint64_t key_;
    uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Fisher-Yates shuffle driven by a keyed stream.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, StreamRng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace xlb
