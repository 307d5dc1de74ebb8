#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcflab/types.hpp"

namespace mcflab {

enum class Gauge { radial, graph, rescaled };

// Evolution laws on a fixed 1-D grid x with state u(x, t):
//   radial:   u_t = u_xx/(1+u_x^2) - (n-1)/u
//   graph:    u_t = u_xx/(1+u_x^2) + (n-1) u_x / x   (axis row: u_t = n u_xx(0))
//   rescaled: u_t = u_xx/(1+u_x^2) - (n-1)/u + (u - x u_x)/2

struct BoundaryCondition {
  enum class Kind {
    dirichlet,       // pinned at `value`
    from_reference,  // pinned at reference(t)
    neumann_slope,   // one-sided slope equals `value`
    axis_even        // graph gauge only: even extension across x = 0
  };
  Kind kind = Kind::dirichlet;
  double value = 0.0;
  std::function<double(double)> reference;

  static BoundaryCondition pinned(double v);
  static BoundaryCondition following(std::function<double(double)> ref);
  static BoundaryCondition slope(double s);
  static BoundaryCondition axis();
};

struct BoundaryPair {
  BoundaryCondition left, right;
};

struct SolverControl {
  double dt = 1e-3;
  bool implicit_scheme = true;  // SDIRK2 (L-stable, order 2); false: explicit
                                // RK4 stepping for small CFL-safe grids
  double newton_tol = 1e-12;
  int max_newton_iters = 16;
  double r_min = 1e-6;          // pinch-detection threshold (radial/rescaled)
  std::size_t snapshot_every = 0;  // 0: keep only first and last states
};

// Typed halt when the radius reaches r_min (neck pinch); the trajectory up to
// the halt time is returned.
struct PinchHalt {
  double t = 0.0;
  std::size_t node = 0;
};

struct FlowTrajectory {
  Gauge gauge = Gauge::radial;
  Dimension dim;
  std::vector<double> grid;                 // z (radial/rescaled) or r (graph)
  std::vector<double> times;                // strictly increasing
  std::vector<std::vector<double>> states;  // one state vector per time
  BoundaryPair bc;
  bool has_axis = false;                    // graph gauge: first node at x = 0

  std::size_t steps = 0;
  double max_residual = 0.0;     // worst per-step trapezoidal PDE residual
  int max_newton_iters = 0;
  std::optional<PinchHalt> halt;

  RadialProfile radial_snapshot(std::size_t i) const;
  GraphProfile graph_snapshot(std::size_t i) const;
};

FlowTrajectory evolve_radial(const RadialProfile& p0, double t0, double t1,
                             const BoundaryPair& bc, const SolverControl& ctrl);
FlowTrajectory evolve_graph(const GraphProfile& p0, double t0, double t1,
                            const BoundaryPair& bc, const SolverControl& ctrl);
// rescaled gauge: same state layout as radial, time variable is tau >= 0
FlowTrajectory evolve_rescaled(const RadialProfile& rho0, double tau0,
                               double tau1, const BoundaryPair& bc,
                               const SolverControl& ctrl);

// (t, sup of H over non-flagged nodes) per snapshot.
std::vector<std::pair<double, double>> h_max_series(const FlowTrajectory& tr);

// Per-snapshot evolution speed u_t evaluated from the right-hand side.
std::vector<std::vector<double>> speed_profiles(const FlowTrajectory& tr);

// Radius-vanishing-time estimate per grid node: continue each column past the
// last snapshot with the 1-D comparison law d(r^2)/dt = -2(n-1) (the r_zz
// term dropped), under which r^2 is exactly linear in t:
// T(z) = t_end + r(z, t_end)^2 / (2(n-1)).
struct VanishingTimeTable {
  std::vector<double> z;
  std::vector<double> T;
  std::string method = "comparison-law-linear-r2";
};
VanishingTimeTable vanishing_time(const FlowTrajectory& tr);

// min over the overlapping axial range of (outer radius - inner radius);
// nonnegative margin means the inner profile is enclosed.
struct EnclosureReport {
  double min_margin = 0.0;
  double z_lo = 0.0, z_hi = 0.0;
  std::size_t samples = 0;
};
EnclosureReport enclosure_check(const RadialProfile& inner,
                                const RadialProfile& outer);

enum class MonotoneQuantity { gaussian_area, rr_z_profile, f_t_profile };

struct MonotoneSeries {
  std::vector<double> time;
  std::vector<double> value;
  double max_increase = 0.0;   // largest first difference (signed)
  double max_decrease = 0.0;   // most negative first difference (signed)
  double tail_correction = 0.0;  // gaussian_area only: round-cylinder tail
                                 // beyond the grid, reported separately
};
// gaussian_area (rescaled gauge): |S^{n-1}| Int rho^{n-1} sqrt(1+rho_z^2)
//   exp(-(z^2+rho^2)/4) dz over the grid (composite Boole when the node
//   count allows, composite Simpson otherwise).
// rr_z_profile (radial gauge): r r_z at the right end (last centered node).
// f_t_profile (graph gauge): min over nodes of the evolution speed.
MonotoneSeries monotone_quantity_series(const FlowTrajectory& tr,
                                        MonotoneQuantity which);

}  // namespace mcflab
