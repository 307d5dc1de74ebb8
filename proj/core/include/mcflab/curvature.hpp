#pragma once

#include "mcflab/types.hpp"

namespace mcflab {

// Curvature of a radius graph r(z).  Inward normal: the meridian principal
// curvature is -r_zz/(1+r_z^2)^{3/2}, the rotational one 1/(r sqrt(1+r_z^2)),
// so H = [-r_zz/(1+r_z^2) + (n-1)/r] / sqrt(1+r_z^2) and a cylinder or
// sphere has H > 0.
CurvatureReport curvature_of_radial(const RadialProfile& p);

// Curvature of a height graph f(r).  Meridian curvature f_rr/(1+f_r^2)^{3/2},
// rotational f_r/(r sqrt(1+f_r^2)); at the axis the removable singularity is
// resolved by the even extension: f_r/r -> f_rr(0) and H(0) = n f_rr(0).
// Throws if has_axis and f_r(0) is nonzero beyond the stencil tolerance.
CurvatureReport curvature_of_graph(const GraphProfile& p);

// Gauge inversion f(r(z)) = z via monotone interpolation.  The radial input
// must be strictly monotone in z (one flank); the graph input strictly
// monotone in f.  Node count of the output matches the input; round trips are
// identity up to interpolation error.
GraphProfile convert_gauge(const RadialProfile& p);
RadialProfile convert_gauge(const GraphProfile& p);

// Sign conditions of a convex ancient flank; r_t is evaluated from the
// radial evolution right-hand side.
ConvexityFlags convexity_flags(const RadialProfile& p);

}  // namespace mcflab
