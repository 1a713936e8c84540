#pragma once

#include <cstdint>
#include <random>

namespace qbell {

// Splittable random source. Each (seed, stream) pair hashes to an independent
// mt19937_64 key, so trials can draw from disjoint streams in any order.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    Rng split(std::uint64_t stream) const;
    std::uint64_t seed() const { return seed_; }
    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() { return engine_(); }
    double uniform();              // [0, 1)
    double normal();               // standard normal
    int below(int n);              // uniform in [0, n)
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace qbell
