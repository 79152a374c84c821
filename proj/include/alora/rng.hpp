#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace alora {

// splitmix64 step; used for mixing seeds, never for sampling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to three
// labels (step, layer, head, ...). Pure function, so any (seed, labels)
// combination names the same stream on every run.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(base ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64(h ^ splitmix64(a));
    h = splitmix64(h ^ splitmix64(b ^ 0x3c6ef372fe94f82bULL));
    h = splitmix64(h ^ splitmix64(c ^ 0xa54ff53a5f1d36f1ULL));
    return h;
}

// Deterministic random stream. Gaussians are produced by an explicit
// Box-Muller transform rather than std::normal_distribution so the byte
// stream does not depend on the standard library's distribution
// implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal. Never returns an exact zero (uniform01 excludes
    // the endpoints, so the radius is strictly positive).
    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double gaussian(double stddev) { return stddev * gaussian(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::mt19937_64 gen_;
};

} // namespace alora
