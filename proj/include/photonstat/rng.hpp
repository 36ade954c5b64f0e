#pragma once

#include <cmath>
#include <cstdint>

#include "photonstat/errors.hpp"

// Deterministic random streams for the simulator.
//
// All randomness flows from one 64-bit root seed through a documented
// splitting function, so that any mode range / chunk / iteration can be
// generated independently of every other one. That is what makes the
// generators bit-identical under any thread partitioning.
//
// Splitting function:  derive_seed(root, tag, index)
//     = mix64(mix64(mix64(root) ^ tag) ^ index)
// where mix64 is the SplitMix64 finalizer (Steele, Lea, Flood 2014).
// Each derived seed feeds a xoshiro256++ stream (Blackman, Vigna 2019)
// whose four state words come from consecutive SplitMix64 outputs.

namespace photonstat {

// Stream tags; also part of the reproducibility contract.
enum StreamTag : std::uint64_t {
    kStreamIteration = 1, // per-iteration root seeds in multi-iteration runs
    kStreamCoherent = 2,  // coherent photon chunks
    kStreamPairs = 3,     // SPDC pair-generation mode ranges
    kStreamDarkSignal = 4,
    kStreamDarkIdler = 5,
    kStreamDarkCoherent = 6,
};

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag,
                                    std::uint64_t index) {
    return mix64(mix64(mix64(root) ^ tag) ^ index);
}

class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        // SplitMix64 state walk, per the xoshiro authors' seeding recipe.
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ull;
            word = mix64(sm - 0x9E3779B97F4A7C15ull);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4]{};
};

inline Xoshiro256pp make_stream(std::uint64_t root, std::uint64_t tag,
                                std::uint64_t index) {
    return Xoshiro256pp(derive_seed(root, tag, index));
}

// Poisson by Knuth's multiplicative inversion. Callers keep lambda small
// (the generators chunk time so lambda stays <= ~8); guard the tail anyway.
inline std::uint64_t sample_poisson(Xoshiro256pp& rng, double lambda) {
    if (!(lambda >= 0.0)) throw ArgumentError("poisson: lambda must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda > 64.0)
        throw ArgumentError("poisson: lambda too large for inversion sampler");
    const double floor_p = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform_pos();
    } while (p > floor_p);
    return k - 1;
}

// Bose-Einstein (geometric on {0,1,...}) with the given mean:
// P(n) = mean^n / (1+mean)^(n+1). Inversion with a log-free fast path
// for the dominant n = 0 outcome.
inline std::uint64_t sample_bose_einstein(Xoshiro256pp& rng, double mean) {
    if (!(mean >= 0.0))
        throw ArgumentError("bose-einstein: mean must be >= 0");
    if (mean == 0.0) {
        rng.next(); // keep stream consumption independent of the mean
        return 0;
    }
    const double q = mean / (1.0 + mean); // P(n >= k) = q^k
    const double u = rng.uniform_pos();
    if (u > q) return 0;
    return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(q)));
}

} // namespace photonstat
