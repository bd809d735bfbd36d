#ifndef CPN_CORE_RNG_HPP
#define CPN_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cpn {

/// Seedable random generator used everywhere randomness is required.
///
/// Engine is std::mt19937_64 (fully specified by the standard). Value
/// derivation below avoids std::uniform_*_distribution, whose output is
/// implementation-defined, so streams are bit-reproducible across
/// standard libraries and platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed), seed_mix_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n) by rejection, unbiased.
    uint64_t uniform_index(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (explicit, not std::normal_distribution).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Derives an independent child stream, e.g. per split or per epoch.
    Rng child(uint64_t stream_id) const {
        // splitmix64 of (state hash, id); decouples derived streams from
        // draws taken on the parent.
        uint64_t z = seed_mix_ ^ (stream_id + 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 eng_;
    uint64_t seed_mix_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace cpn

#endif
