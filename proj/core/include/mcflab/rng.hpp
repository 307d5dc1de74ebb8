#pragma once

#include <cstdint>
#include <random>

namespace mcflab {

// Deterministic random stream.  The uniform mapping is fixed here (top 53
// bits of the engine output) instead of relying on std::uniform_real_
// distribution, whose output is implementation-defined; reruns with the same
// seed must be bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // uniform in [0, 1)
  double uniform01();
  // uniform in [a, b)
  double uniform(double a, double b);
  // uniform magnitude in [lo, hi) with independent random sign
  double signed_uniform(double lo, double hi);
  // derive an independent stream for a labeled sub-task
  Rng fork(std::uint64_t label);

 private:
  std::mt19937_64 gen_;
};

}  // namespace mcflab
