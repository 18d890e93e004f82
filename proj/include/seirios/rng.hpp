#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

#include "seirios/mathutil.hpp"

namespace seirios::rng {

// splitmix64 step (Vigna). Used both as the generator and to derive
// independent substreams from a (seed, path...) tuple, so parallel
// synthesis is reproducible regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // One standard normal pair via Box-Muller; fixed draw count keeps
    // streams aligned across call sites.
    std::complex<double> randn_pair() {
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
    }

    double randn() { return randn_pair().real(); }

    // Circularly symmetric complex normal with E|z|^2 = variance.
    std::complex<double> randn_c(double variance = 1.0) {
        return randn_pair() * std::sqrt(variance / 2.0);
    }

  private:
    std::uint64_t state_;
};

// Derive a deterministic substream from a master seed and an id path,
// e.g. substream(seed, {ap, channel, antenna, tag}).
inline Stream substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t tmp = seed;
    std::uint64_t s = splitmix64(tmp);
    for (std::uint64_t p : path) {
        tmp = s ^ (0x9e3779b97f4a7c15ull * (p + 1));
        s = splitmix64(tmp);
    }
    return Stream(s);
}

}  // namespace seirios::rng
