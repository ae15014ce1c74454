#ifndef LEVYLAB_RNG_HPP
#define LEVYLAB_RNG_HPP

#include <cstdint>
#include <limits>
#include <random>

namespace levylab {

// Identity of a reproducible random stream.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t id = 0;

    // Deterministic sub-stream, independent of the parent and of siblings.
    RngStream child(std::uint64_t k) const noexcept;

    bool operator==(const RngStream&) const = default;
};

// xoshiro256++ seeded through splitmix64 from (seed, id).
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(const RngStream& stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept;

    // Uniform on the open interval (0, 1).
    double uniform() noexcept;
    double exponential() noexcept;
    double normal() noexcept;

    const RngStream& stream() const noexcept { return stream_; }

private:
    RngStream stream_;
    std::uint64_t s_[4];
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace levylab

#endif
