#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bitree {

// splitmix64 step.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// All randomness flows from one master seed; sub-streams are derived by
// hashing a domain label and an index through the same mixer, so a report
// is reproducible from a single integer.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
    for (char c : domain) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = master ^ h;
    s += index * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    return splitmix64(s);
}

// Deterministic generator with hand-rolled distributions; identical output on
// every platform, unlike the std:: distribution adapters.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return splitmix64(state_); }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    bool bernoulli(double p) { return uniform01() < p; }

    double exponential() { return -std::log1p(-uniform01()); }

    // Pareto with scale 1: (1-u)^(-1/alpha).
    double pareto(double alpha) { return std::pow(1.0 - uniform01(), -1.0 / alpha); }

  private:
    std::uint64_t state_;
};

}  // namespace bitree
