#include "xlb/rng.hpp"

#include <cmath>
#include <numbers>

namespace xlb {

namespace {
constexpr uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;
}

uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

RngKey::RngKey(uint64_t seed) : state_(mix64(seed + kGoldenGamma)) {}

RngKey RngKey::absorb(uint64_t v) const {
    RngKey k = *this;
    k.state_ = mix64(k.state_ ^ mix64(v + kGoldenGamma));
    return k;
}

RngKey RngKey::absorb(std::string_view tag) const {
    // FNV-1a over the bytes, then mixed into the state like an index.
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return absorb(h);
}

uint64_t StreamRng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
}

double StreamRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t StreamRng::next_below(uint64_t bound) {
    return next_u64() % bound;
}

double StreamRng::next_normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> StreamRng::normal_vector(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = next_normal();
    return v;
}

}  // namespace xlb
