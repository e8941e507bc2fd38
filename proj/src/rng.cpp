#include "edgetrade/rng.hpp"

#include <stdexcept>

namespace edgetrade {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(seed);
    for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below needs n > 0");
    // Largest multiple of n that fits, as 2^64 - (2^64 mod n).
    const std::uint64_t reject_from = -(-n % n);
    while (true) {
        const auto x = engine_();
        if (reject_from == 0 || x < reject_from) return x % n;
    }
}

bool Rng::bernoulli(const Rational& p) {
    using boost::multiprecision::cpp_int;
    if (p < 0 || p > 1) throw std::invalid_argument("probability outside [0, 1]");
    const cpp_int num = boost::multiprecision::numerator(p);
    const cpp_int den = boost::multiprecision::denominator(p);
    if (den > cpp_int(UINT64_MAX)) throw std::invalid_argument("probability denominator too large");
    return cpp_int(below(static_cast<std::uint64_t>(den))) < num;
}

}  // namespace edgetrade
