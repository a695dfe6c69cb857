#pragma once
#include <cstdint>

namespace colrisk {

// splitmix64 finalizer (Steele/Lea/Burton, public domain). Used both as a
// mixing function and, with a Weyl increment, as a counter-based stream:
// every (seed, code index, substream) triple yields an independent sequence,
// so cohort generation is order- and thread-count-independent.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    Rng(uint64_t seed, uint64_t index, uint64_t substream)
        : state_(mix64(mix64(mix64(seed) ^ index) ^ (substream * 0x9e3779b97f4a7c15ull))) {}

    explicit Rng(uint64_t seed) : state_(mix64(seed)) {}

    uint64_t next_u64() { return mix64(state_ += 0x9e3779b97f4a7c15ull); }

    // uniform in [0,1) with 53 random bits
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    bool fair_bit() { return next_u64() >> 63; }

  private:
    uint64_t state_;
};

} // namespace colrisk
