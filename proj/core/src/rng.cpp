#include "mcflab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mcflab {

double Rng::uniform01() {
  return std::ldexp(static_cast<double>(gen_() >> 11), -53);
}

double Rng::uniform(double a, double b) {
  if (!(b > a)) throw std::invalid_argument("Rng::uniform: need b > a");
  return a + (b - a) * uniform01();
}

double Rng::signed_uniform(double lo, double hi) {
  const double mag = uniform(lo, hi);
  return (gen_() & 1u) ? mag : -mag;
}

Rng Rng::fork(std::uint64_t label) {
  // splitmix-style mix of the parent stream with the label; cheap and stable
  std::uint64_t s = gen_() ^ (label + 0x9e3779b97f4a7c15ull);
  s ^= s >> 30;
  s *= 0xbf58476d1ce4e5b9ull;
  s ^= s >> 27;
  s *= 0x94d049bb133111ebull;
  s ^= s >> 31;
  return Rng(s);
}

}  // namespace mcflab
