#pragma once

#include <cstdint>
#include <random>

namespace statecal {

// Deterministic random stream.  The variate algorithms are pinned here (not
// delegated to <random> distributions, whose algorithms are implementation
// defined) so that runs reproduce bit-for-bit across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  // Independent substream: chain i uses for_stream(seed, i).
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no second-value caching: one draw, one
  // state advance pattern, so substream reproducibility is trivial).
  double normal();

  // Gamma(shape, rate) by Marsaglia-Tsang squeeze; shape<1 uses the boost
  // Ga(a) = Ga(a+1) * U^{1/a}.
  double gamma(double shape, double rate);

  // Beta(1, b) by inverse CDF: 1 - (1-U)^{1/b}.
  double beta_one(double b);

 private:
  static std::uint64_t mix(std::uint64_t x);
  std::mt19937_64 gen_;
};

}  // namespace statecal
