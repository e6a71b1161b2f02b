#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dkl {

/// SplitMix64 mixing step; used to derive independent stream seeds from a
/// master seed without correlated low bits.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for a named sub-stream (graph generation, per-agent shuffles, ...)
/// of a master run seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Deterministic random source: mt19937_64 with fixed transforms on top.
/// All draws consume a pinned number of engine words (uniform: 1,
/// uniform_int: 1, normal: 2 per generated pair via Box-Muller), so streams
/// are reproducible for a given seed independent of platform math libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound must be positive; the modulo
    /// bias is below 2^-32 for the bounds used here.
    std::uint64_t uniform_int(std::uint64_t bound) { return engine_() % bound; }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached so consecutive calls consume the engine evenly.
    double normal();

    /// Fisher-Yates shuffle driven by uniform_int.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[uniform_int(i)]);
        }
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dkl
