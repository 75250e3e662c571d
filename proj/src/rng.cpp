#include "blindmix/rng.hpp"

#include <cmath>
#include <numbers>

namespace blindmix::rng {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t derive(uint64_t master, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t st = master;
    uint64_t k = splitmix64(st);
    st ^= a + 0x9e3779b97f4a7c15ULL + (k << 6) + (k >> 2);
    k = splitmix64(st);
    st ^= b + 0x9e3779b97f4a7c15ULL + (k << 6) + (k >> 2);
    k = splitmix64(st);
    st ^= c + 0x9e3779b97f4a7c15ULL + (k << 6) + (k >> 2);
    return splitmix64(st);
}

static inline uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

Stream::Stream(uint64_t key) {
    // Seed the four lanes from splitmix64 as recommended for xoshiro.
    uint64_t st = key;
    for (auto& lane : s_) lane = splitmix64(st);
}

uint64_t Stream::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Stream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Stream::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_unit_open()));
    const double t = 2.0 * std::numbers::pi * next_unit();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
}

cplx Stream::next_cgaussian() {
    // E|z|^2 = 1 with the 1/sqrt(2) split.
    const double a = next_gaussian();
    const double b = next_gaussian();
    return {a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0};
}

int Stream::next_sign() { return (next_u64() >> 63) ? 1 : -1; }

void Stream::fill_cgaussian(std::span<cplx> out) {
    for (cplx& v : out) v = next_cgaussian();
}

}  // namespace blindmix::rng
