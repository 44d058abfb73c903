#pragma once

#include <cstdint>

// Deterministic PRNG used by every generator in the toolkit. The random
// bit stream is pure 64-bit integer arithmetic (xorshift64*), so corpora
// synthesized from the same seed are reproducible across platforms.
// The full algorithm is documented in docs/formats.md.

namespace opf {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class Xorshift64Star {
public:
    explicit Xorshift64Star(uint64_t seed) {
        state_ = splitmix64(seed);
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
    }

    uint64_t next_u64() {
        uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1Dull;
    }

    // uniform in [0, 1), 53-bit resolution
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [-1, 1)
    double next_bipolar() {
        return 2.0 * next_unit() - 1.0;
    }

    // Approximately standard normal: sum of 12 uniforms minus 6 (Irwin-Hall).
    // Chosen over Box-Muller because it needs no transcendental calls, so the
    // stream stays bit-identical on any IEEE-754 platform. Support is [-6, 6],
    // which is all a noise generator needs.
    double next_gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i)
            s += next_unit();
        return s - 6.0;
    }

private:
    uint64_t state_;
};

// Stable derivation of per-item seeds from a base seed and indices, so a
// corpus item can be regenerated without replaying the whole corpus.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = splitmix64(base + 0x9E3779B97F4A7C15ull * (a + 1));
    s = splitmix64(s + 0x9E3779B97F4A7C15ull * (b + 1));
    s = splitmix64(s + 0x9E3779B97F4A7C15ull * (c + 1));
    return s;
}

} // namespace opf
