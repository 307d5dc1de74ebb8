#pragma once

#include "mcflab/grid.hpp"
#include "mcflab/types.hpp"

namespace mcflab {

// Radius of the self-similarly shrinking round cylinder, sqrt(2(n-1)(-t));
// throws for t >= 0.
double cylinder_radius(Dimension n, double t);

// Radius at time t <= 0 of the round sphere that has radius r0 at time 0:
// sqrt(r0^2 - 2 n t).  Throws if the radicand is nonpositive.
double sphere_radius(Dimension n, double r0, double t);

// Translating bowl profile: the convex entire graph f with
// f_rr/(1+f_r^2) + (n-1) f_r / r = c, f(0) = 0, f_r(0) = 0.
class BowlSoliton {
 public:
  Dimension dim;
  double c = 1.0;                    // translation speed
  GraphProfile profile;              // dense table on [0, r_max]
  std::vector<double> slope_table;   // f_r at profile.r
  double tip_second_derivative = 0;  // f_rr(0) = c/n
  double slope_ratio_at_rmax = 0;    // f_r(r_max)/r_max, -> c/(n-1)
  double max_ode_residual = 0;       // independent finite-difference check

  double height(double r) const;
  double slope(double r) const;
  // large-r model of the slope ratio: f_r/r = c/(n-1) - 1/(c r^2) + ...
  double slope_ratio_model(double r) const;

 private:
  friend BowlSoliton solve_bowl(Dimension, double, double, double);
  // height() interpolates with cubic Hermite pieces over (profile, slope
  // table), so its second derivative stays accurate near the tip where a
  // value-only fit would wiggle at the curvature level.
  Pchip g_interp_;
};

// Integrates the bowl ODE from a two-term series start at the axis with the
// adaptive integrator at tolerance tol; throws if the independent
// finite-difference residual of the table exceeds residual_bound.
BowlSoliton solve_bowl(Dimension n, double c, double r_max, double tol = 1e-10);

// Profile u_a of the compact-ended self-shrinker family (H = <x,nu>/2 for a
// surface of revolution): -u''/(1+u'^2) + (n-1)/u = (u - y u')/2 on [0, a],
// u(a) = 0 with a smooth cap.  Solved in arclength coordinates from the tip,
// where the integration is stable (the e^{y^2/4} mode of the linearization
// decays toward the tip); the symmetry-plane slope u'(0) is a diagnostic
// that must vanish as a grows, not a shooting target -- in the u'(0) = 0
// family only the sphere member caps off.
class ShrinkerProfile {
 public:
  Dimension dim;
  double a = 10.0;
  // arclength samples ordered by increasing y; the last row is the tip
  // (y = a, u = 0, phi = -pi/2), phi the tangent angle
  std::vector<double> y, u, phi;
  double u_at_origin = 0;      // u(0)
  double slope_at_origin = 0;  // u'(0), observed O(a^-4)
  double tip_curvature = 0;    // dphi/dsigma at the tip, equals a/(2n)
  double max_ode_residual = 0; // finite-difference profile-equation check,
                               // away from the vertical tangent at the tip
  bool concave = false;        // u'' <= 0 over the checked range

  // u_a(y); near the tip (vertical tangent) a local cap model
  // u = sqrt(2(a - y)/k), k = a/(2n), replaces interpolation
  double radius(double y) const;

 private:
  friend ShrinkerProfile solve_shrinker(Dimension, double, double, double);
  Pchip u_of_y_;
  double y_cap_ = 0;  // interpolation valid on [0, y_cap_]
};

// a_min guards the range where the family's neck bounds are meaningful; the
// sphere member a = sqrt(2n) (u = sqrt(2n - y^2)) is inside the default.
ShrinkerProfile solve_shrinker(Dimension n, double a, double tol = 1e-10,
                               double a_min = 2.0);

// The rescaled-and-translated barrier surface at time t < 0: radii
// (-t)^{1/2} u_a((K a^2 - z)(-t)^{-1/2}) over the axial extent
// [K a^2 - a (-t)^{1/2}, K a^2].  The exact tip (radius 0) is trimmed to a
// fraction of the extent so the result is a valid radius graph.
RadialProfile shrinker_barrier_at(const ShrinkerProfile& s, double K, double t,
                                  std::size_t nodes = 1001);

}  // namespace mcflab
