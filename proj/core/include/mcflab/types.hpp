#pragma once

#include <cstdint>
#include <vector>

namespace mcflab {

// Hypersurface dimension n; the ambient space is R^{n+1} and cross sections
// are round spheres S^{n-1}.  n >= 3 throughout; n = 2 only behind an
// explicit opt-in (used for cross-checks against surface-case code).
class Dimension {
 public:
  Dimension() : n_(3) {}
  explicit Dimension(int n, bool allow_surface_case = false);
  int value() const { return n_; }
  operator int() const { return n_; }

 private:
  int n_;
};

// Rotationally symmetric hypersurface as a radius graph over the axis:
// { (r(z) theta, z) : theta in S^{n-1} }.
struct RadialProfile {
  Dimension dim;
  double t = -1.0;         // snapshot time
  std::vector<double> z;   // strictly increasing axial coordinates
  std::vector<double> r;   // radii, all > 0
  int stencil_order = 2;   // finite-difference accuracy (2 or 4)

  void validate() const;   // throws std::invalid_argument on violations
};

// Rotationally symmetric hypersurface as a height graph over the radius:
// { (r theta, f(r)) }.  When has_axis is set the first node is r = 0 and the
// smooth-tip condition f_r(0) = 0 is imposed through even extension.
struct GraphProfile {
  Dimension dim;
  double t = 0.0;
  std::vector<double> r;   // strictly increasing radii, r[0] == 0 iff has_axis
  std::vector<double> f;   // heights
  bool has_axis = true;
  int stencil_order = 2;

  void validate() const;
};

// Principal curvatures and derived invariants per node, inward normal
// convention (convex profiles have H > 0).
struct CurvatureReport {
  std::vector<double> kappa_axial;       // meridian principal curvature
  std::vector<double> kappa_rotational;  // rotational principal curvature
                                         // (multiplicity n-1)
  std::vector<double> H;                 // kappa_axial + (n-1) kappa_rotational
  std::vector<double> A_norm_sq;         // kappa_axial^2 + (n-1) kappa_rot^2
  std::vector<std::uint8_t> one_sided;   // 1 where one-sided stencils were used
};

// Sign conditions satisfied by convex ancient flanks in the radial gauge.
struct ConvexityFlags {
  bool r_positive = false;
  bool r_z_positive = false;
  bool r_t_negative = false;   // evaluated from the evolution right-hand side
  bool r_zz_negative = false;
};

}  // namespace mcflab
