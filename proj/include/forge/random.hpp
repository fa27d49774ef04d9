#pragma once

#include <cstdint>
#include <initializer_list>

namespace forge {

// SplitMix64. Every stochastic choice in the pipeline is drawn from one of
// these so that outputs depend on the seed alone, never on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    // Uniform in [0, 1) with 53 random bits.
    double unit();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    // Standard normal via Box-Muller.
    double normal();

private:
    std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

// Order-sensitive hash of a sequence of words into a sub-seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// FNV-1a over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace forge
