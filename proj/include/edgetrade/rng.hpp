// Seeded randomness that gives the same draws on every platform.
//
// std::mt19937_64 output is fixed by the standard, but the std distributions
// are not, so bounded draws, Bernoulli trials and shuffles are done here.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "edgetrade/domain.hpp"

namespace edgetrade {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Folds a seed and a path of labels into one 64-bit stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n); n must be positive. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Uniform in [lo, hi).
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo); }

    // True with probability p, 0 <= p <= 1, exact for p = a/b with b < 2^64.
    bool bernoulli(const Rational& p);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace edgetrade
