#pragma once

#include <cmath>
#include <cstdint>

namespace ganaudit {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Streams are derived from (seed, a, b, c) so that results never depend on
// scheduling or evaluation order. Samples, chains and restarts each get
// their own stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    constexpr std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t h = mix64(base + gamma);
    h = mix64(h ^ (a + gamma));
    h = mix64(h ^ (b + gamma));
    h = mix64(h ^ (c + gamma));
    return h;
}

// splitmix64 generator with Box-Muller normals. Self-contained so outputs
// are reproducible across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform double in (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        double a = kTwoPi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // uniform integer in [0, n). Modulo bias is negligible at desk scale.
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ganaudit
