#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace convsim {

// splitmix64 finalizer; used to derive independent per-run streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for stream `index` under `master`. Two rounds keep nearby masters
// and nearby indices from producing correlated engine seeds.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Thin wrapper around mt19937_64. Sampling helpers are written out by hand
// so results do not depend on the standard library's distribution
// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t master, std::uint64_t index) {
        return Rng(stream_seed(master, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
    std::size_t below(std::size_t n);

    // Index drawn with probability proportional to weights (non-negative,
    // positive total).
    std::size_t categorical(std::span<const double> weights);

    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace convsim
