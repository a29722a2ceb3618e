#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace glc {

// splitmix64 finalizer; the mixing primitive behind seed derivation.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based sub-seed derivation: every independent random stream is
// addressed by a path of integers under a master seed, e.g.
// derive_seed(master, {kStreamWeights, seed_index, node}). Folding is
// order-sensitive, so distinct paths give unrelated streams and reruns with
// the same master seed reproduce every stream exactly.
inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path) {
    uint64_t h = mix64(master);
    for (uint64_t id : path) h = mix64(h ^ (id + 0x9e3779b97f4a7c15ULL));
    return h;
}

// Thin wrapper over std::mt19937_64 with hand-rolled uniform draws. The
// standard distributions are implementation-defined, so artifact determinism
// rests only on the engine (whose output sequence the standard pins down).
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(mix64(seed)) {}

    uint64_t next() { return gen_(); }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [0,n) by rejection; unbiased.
    uint64_t uniform_int(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace glc
