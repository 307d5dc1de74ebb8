#include "mcflab/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcflab {

Dimension::Dimension(int n, bool allow_surface_case) : n_(n) {
  if (n < 2 || (n == 2 && !allow_surface_case)) {
    throw std::invalid_argument("Dimension: n must be >= 3 (n = 2 requires "
                                "the explicit surface-case flag), got " +
                                std::to_string(n));
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_strictly_increasing(const std::vector<double>& x, const char* what) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument(what);
  }
}

void check_finite(const std::vector<double>& x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument(what);
  }
}

}  // namespace

void RadialProfile::validate() const {
  require(z.size() == r.size(), "RadialProfile: grid/value size mismatch");
  require(z.size() >= 5, "RadialProfile: need at least 5 nodes");
  require(stencil_order == 2 || stencil_order == 4,
          "RadialProfile: stencil order must be 2 or 4");
  check_strictly_increasing(z, "RadialProfile: z grid not strictly increasing");
  check_finite(z, "RadialProfile: non-finite z");
  check_finite(r, "RadialProfile: non-finite r");
  for (double v : r) require(v > 0.0, "RadialProfile: radius must be positive");
}

void GraphProfile::validate() const {
  require(r.size() == f.size(), "GraphProfile: grid/value size mismatch");
  require(r.size() >= 5, "GraphProfile: need at least 5 nodes");
  require(stencil_order == 2 || stencil_order == 4,
          "GraphProfile: stencil order must be 2 or 4");
  check_strictly_increasing(r, "GraphProfile: r grid not strictly increasing");
  check_finite(r, "GraphProfile: non-finite r");
  check_finite(f, "GraphProfile: non-finite f");
  if (has_axis) {
    require(r.front() == 0.0, "GraphProfile: has_axis requires r[0] == 0");
  } else {
    require(r.front() > 0.0, "GraphProfile: detached grid must have r[0] > 0");
  }
}

}  // namespace mcflab
