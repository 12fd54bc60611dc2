#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace precipgen {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sampling layer. Every variate is derived from the raw engine
// stream through fixed arithmetic (no distribution objects with unspecified
// algorithms), so a seed pins every output bit across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_raw() { return eng_(); }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform01() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  // Exponential with the given rate; strictly positive.
  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log(uniform01()) / rate;
  }

  // Standard normal via Box-Muller (single value; the pair's partner is dropped
  // to keep the stream layout simple and deterministic).
  double normal01() {
    double u1 = uniform01(), u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Uniform index in [0, n) via widening multiply (deterministic, no rejection).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(eng_()) * static_cast<unsigned __int128>(n)) >> 64);
  }

  // Draws an index with probability proportional to weights[i] (cumulative scan).
  std::size_t categorical(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("categorical: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("categorical: negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
    const double u = uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) return i;
    }
    return weights.size() - 1;
  }

  // Independent generator for a derived stream (replicates, jitter, ...).
  Rng fork(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 1))); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace precipgen
