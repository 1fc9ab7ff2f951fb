#pragma once

#include <cstdint>
#include <random>

namespace setonet {

// Thin wrapper over mt19937_64. Streams derived from (seed, index) are
// independent of the order in which they are requested.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x5e70u};
    Rng r;
    r.eng_.seed(seq);
    return r;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  std::uint64_t next() { return eng_(); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

}  // namespace setonet
