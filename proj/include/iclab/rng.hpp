#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace iclab {

// Seed mixing and hand-rolled distributions. std::mt19937_64 is fully
// specified by the standard, but the std distributions are not, so all
// sampling goes through the helpers below to keep streams reproducible
// across compilers and standard libraries.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(const char* s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent child seed from (base, tag). Chaining derive_seed
// calls yields hierarchical, order-sensitive stream ids.
inline uint64_t derive_seed(uint64_t base, uint64_t tag) {
    uint64_t s = base ^ (0x9e3779b97f4a7c15ULL + tag);
    splitmix64(s);
    uint64_t m = s;
    return splitmix64(m);
}

inline uint64_t derive_seed(uint64_t base, const char* tag) {
    return derive_seed(base, fnv1a64(tag));
}

class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound) via Lemire's multiply-shift reduction.
    uint64_t uniform_int(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * bound) >> 64);
    }

    // Standard normal via Box-Muller; the second deviate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace iclab
