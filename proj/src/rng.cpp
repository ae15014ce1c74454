#include "levylab/rng.hpp"

#include <cmath>

namespace levylab {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStream RngStream::child(std::uint64_t k) const noexcept {
    std::uint64_t st = id ^ (0xd1b54a32d192ed03ULL * (k + 1));
    std::uint64_t mixed = splitmix64(st);
    return RngStream{seed, mixed ^ rotl(id, 17)};
}

Rng::Rng(const RngStream& stream) noexcept : stream_(stream) {
    std::uint64_t st = stream.seed;
    std::uint64_t a = splitmix64(st);
    st ^= stream.id * 0x9fb21c651e98df25ULL;
    std::uint64_t b = splitmix64(st);
    std::uint64_t sm = a ^ rotl(b, 29);
    for (auto& w : s_) w = splitmix64(sm);
}

Rng::result_type Rng::operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept {
    // 53 random bits, offset by half an ulp so 0 and 1 are excluded.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential() noexcept { return -std::log(uniform()); }

double Rng::normal() noexcept { return normal_(*this); }

}  // namespace levylab
