#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <doctest.h>

#include "mcflab/exact.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/harness.hpp"

using namespace mcflab;

namespace {

RadialProfile flat_cylinder(int n, double t, double z_lo, double z_hi,
                            std::size_t nodes) {
  RadialProfile p;
  p.dim = Dimension(n);
  p.t = t;
  p.z = uniform_grid(z_lo, z_hi, nodes);
  p.r.assign(nodes, cylinder_radius(p.dim, t));
  return p;
}

BoundaryPair cylinder_bc(int n) {
  auto ref = [n](double t) { return cylinder_radius(Dimension(n), t); };
  return {BoundaryCondition::following(ref), BoundaryCondition::following(ref)};
}

double cylinder_error(double dt, bool implicit_scheme) {
  const int n = 3;
  const auto p0 = flat_cylinder(n, -1.0, -1.0, 1.0, 21);
  SolverControl ctrl;
  ctrl.dt = dt;
  ctrl.implicit_scheme = implicit_scheme;
  const auto tr = evolve_radial(p0, -1.0, -0.5, cylinder_bc(n), ctrl);
  const double exact = cylinder_radius(Dimension(n), tr.times.back());
  double err = 0.0;
  for (double v : tr.states.back()) err = std::max(err, std::fabs(v - exact));
  return err;
}

}  // namespace

TEST_CASE("shrinking cylinder follows the exact radius law") {
  CHECK(cylinder_error(1e-3, true) <= 1e-6);
  // explicit stepping is fourth order in time; flat data keeps it CFL-safe
  CHECK(cylinder_error(1e-3, false) <= 1e-9);
}

TEST_CASE("implicit stepping converges at second order in dt") {
  const double e1 = cylinder_error(4e-3, true);
  const double e2 = cylinder_error(2e-3, true);
  const double e3 = cylinder_error(1e-3, true);
  const double p12 = std::log2(e1 / e2);
  const double p23 = std::log2(e2 / e3);
  INFO("orders ", p12, " ", p23);
  CHECK(std::fabs(p12 - 2.0) <= 0.3);
  CHECK(std::fabs(p23 - 2.0) <= 0.3);
}

TEST_CASE("shrinking sphere cap follows the exact solution in the graph gauge") {
  const int n = 3;
  const double R0 = 2.0;
  auto exact_f = [&](double r, double t) {
    const double R = sphere_radius(Dimension(n), R0, t);
    return -std::sqrt(R * R - r * r);
  };
  GraphProfile g0;
  g0.dim = Dimension(n);
  g0.t = 0.0;
  g0.r = uniform_grid(0.0, 1.0, 161);
  g0.f.resize(g0.r.size());
  for (std::size_t i = 0; i < g0.r.size(); ++i) g0.f[i] = exact_f(g0.r[i], 0.0);
  BoundaryPair bc{BoundaryCondition::axis(),
                  BoundaryCondition::following(
                      [&](double t) { return exact_f(1.0, t); })};
  SolverControl ctrl;
  ctrl.dt = 5e-4;
  const auto tr = evolve_graph(g0, 0.0, 0.25, bc, ctrl);
  double err = 0.0;
  for (std::size_t i = 0; i < tr.grid.size(); ++i)
    err = std::max(err,
                   std::fabs(tr.states.back()[i] - exact_f(tr.grid[i], 0.25)));
  CHECK(err <= 2e-4);
  CHECK(tr.halt == std::nullopt);
  CHECK(tr.max_newton_iters <= 8);
}

TEST_CASE("ordered radial data stays ordered") {
  const int n = 3;
  RadialProfile inner;
  inner.dim = Dimension(n);
  inner.t = 0.0;
  inner.z = uniform_grid(-2.0, 2.0, 81);
  inner.r.resize(inner.z.size());
  for (std::size_t i = 0; i < inner.z.size(); ++i)
    inner.r[i] = 2.0 + 0.3 * std::cos(0.25 * std::numbers::pi * inner.z[i]);
  RadialProfile outer = inner;
  for (auto& v : outer.r) v += 0.4;

  SolverControl ctrl;
  ctrl.dt = 1e-3;
  BoundaryPair bci{BoundaryCondition::pinned(inner.r.front()),
                   BoundaryCondition::pinned(inner.r.back())};
  BoundaryPair bco{BoundaryCondition::pinned(outer.r.front()),
                   BoundaryCondition::pinned(outer.r.back())};
  const auto ti = evolve_radial(inner, 0.0, 0.15, bci, ctrl);
  const auto to = evolve_radial(outer, 0.0, 0.15, bco, ctrl);
  double min_gap = 1e300;
  for (std::size_t i = 0; i < ti.grid.size(); ++i)
    min_gap = std::min(min_gap, to.states.back()[i] - ti.states.back()[i]);
  CHECK(min_gap > 0.0);

  const auto rep = enclosure_check(ti.radial_snapshot(ti.states.size() - 1),
                                   to.radial_snapshot(to.states.size() - 1));
  CHECK(rep.min_margin == doctest::Approx(min_gap).epsilon(1e-12));
  CHECK(rep.samples == ti.grid.size());
}

TEST_CASE("enclosure_check reports the overlap window and violations") {
  RadialProfile inner;
  inner.dim = Dimension(3);
  inner.z = uniform_grid(-2.0, 2.0, 41);
  inner.r.assign(41, 2.0);
  RadialProfile outer;
  outer.dim = Dimension(3);
  outer.z = uniform_grid(-1.0, 3.0, 81);
  outer.r.assign(81, 2.5);
  const auto rep = enclosure_check(inner, outer);
  CHECK(rep.min_margin == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.z_lo == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rep.z_hi == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.samples > 0);
  const auto swapped = enclosure_check(outer, inner);
  CHECK(swapped.min_margin == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("a thin neck halts the radial flow with a typed pinch") {
  RadialProfile p0;
  p0.dim = Dimension(3);
  p0.t = 0.0;
  p0.z = uniform_grid(-1.0, 1.0, 101);
  p0.r.resize(p0.z.size());
  for (std::size_t i = 0; i < p0.z.size(); ++i)
    p0.r[i] = 0.3 + p0.z[i] * p0.z[i];
  BoundaryPair bc{BoundaryCondition::pinned(1.3),
                  BoundaryCondition::pinned(1.3)};
  SolverControl ctrl;
  ctrl.dt = 1e-4;
  // halt while the collapse is still resolvable at this step size
  ctrl.r_min = 0.05;
  const auto tr = evolve_radial(p0, 0.0, 0.1, bc, ctrl);
  REQUIRE(tr.halt.has_value());
  CHECK(tr.halt->t > 0.01);
  CHECK(tr.halt->t < 0.09);
  CHECK(std::fabs(tr.grid[tr.halt->node]) <= 0.2);
  CHECK(tr.times.back() == tr.halt->t);
}

TEST_CASE("translating bowl speed identity and tip slope") {
  const auto bowl = solve_bowl(Dimension(3), 1.0, 30.0);
  const double r_hi = 8.0;
  GraphProfile g0;
  g0.dim = Dimension(3);
  g0.t = 0.0;
  g0.r = uniform_grid(0.0, r_hi, 121);
  g0.f.resize(g0.r.size());
  for (std::size_t i = 0; i < g0.r.size(); ++i) g0.f[i] = bowl.height(g0.r[i]);
  BoundaryPair bc{BoundaryCondition::axis(),
                  BoundaryCondition::following([&](double t) {
                    return bowl.height(r_hi) + t;
                  })};
  SolverControl ctrl;
  ctrl.dt = 2.5e-4;
  ctrl.snapshot_every = 40;
  const auto tr = evolve_graph(g0, 0.0, 0.05, bc, ctrl);
  const auto rep = check_tip_speed(tr, 1.0, 3.0);
  CHECK(rep.applicable);
  CHECK(rep.max_identity_gap <= 1e-9);
  CHECK(rep.min_speed >= 0.99);
  CHECK(rep.min_speed <= 1.01);
  CHECK(rep.tip_slope == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(rep.sup_dev_first <= 1e-3);
  CHECK(rep.sup_dev_last <= 1e-3);

  // a radial trajectory is flagged inapplicable, not failed
  const auto p0 = flat_cylinder(3, -1.0, -1.0, 1.0, 21);
  SolverControl quick;
  quick.dt = 1e-2;
  const auto rtr = evolve_radial(p0, -1.0, -0.9, cylinder_bc(3), quick);
  CHECK_FALSE(check_tip_speed(rtr, 1.0, 3.0).applicable);
}

TEST_CASE("the round cylinder is steady in the rescaled gauge") {
  RadialProfile rho0;
  rho0.dim = Dimension(3);
  rho0.t = 0.0;
  rho0.z = uniform_grid(-4.0, 4.0, 161);
  rho0.r.assign(rho0.z.size(), 2.0);
  BoundaryPair bc{BoundaryCondition::pinned(2.0),
                  BoundaryCondition::pinned(2.0)};
  SolverControl ctrl;
  ctrl.dt = 1e-3;
  ctrl.snapshot_every = 100;
  const auto tr = evolve_rescaled(rho0, 0.0, 1.0, bc, ctrl);
  double dev = 0.0;
  for (double v : tr.states.back()) dev = std::max(dev, std::fabs(v - 2.0));
  CHECK(dev <= 1e-10);

  const auto area = monotone_quantity_series(tr, MonotoneQuantity::gaussian_area);
  REQUIRE(area.time.size() == tr.times.size());
  CHECK(std::fabs(area.max_increase) <= 1e-10);
  CHECK(std::fabs(area.max_decrease) <= 1e-10);
  CHECK(area.tail_correction > 0.0);
  CHECK(area.value.front() > 0.0);
}

TEST_CASE("vanishing-time table is exact on the cylinder") {
  const auto p0 = flat_cylinder(3, -1.0, -2.0, 2.0, 41);
  SolverControl ctrl;
  ctrl.dt = 1e-3;
  const auto tr = evolve_radial(p0, -1.0, -0.6, cylinder_bc(3), ctrl);
  const auto vt = vanishing_time(tr);
  REQUIRE(vt.z.size() == tr.grid.size());
  CHECK(vt.method == "comparison-law-linear-r2");
  for (double T : vt.T) CHECK(std::fabs(T) <= 1e-5);
}

TEST_CASE("h_max_series tracks the exact cylinder mean curvature") {
  const auto p0 = flat_cylinder(3, -1.0, -1.0, 1.0, 41);
  SolverControl ctrl;
  ctrl.dt = 1e-3;
  ctrl.snapshot_every = 100;
  const auto tr = evolve_radial(p0, -1.0, -0.5, cylinder_bc(3), ctrl);
  const auto series = h_max_series(tr);
  REQUIRE(series.size() == tr.times.size());
  double prev = 0.0;
  for (const auto& [t, h] : series) {
    const double exact = 2.0 / cylinder_radius(Dimension(3), t);
    CHECK(h == doctest::Approx(exact).epsilon(1e-5));
    CHECK(h > prev);  // sup H grows as the cylinder shrinks
    prev = h;
  }
}

TEST_CASE("snapshot accessors carry time, grid, and state") {
  const auto p0 = flat_cylinder(3, -1.0, -1.0, 1.0, 21);
  SolverControl ctrl;
  ctrl.dt = 1e-3;
  ctrl.snapshot_every = 250;
  const auto tr = evolve_radial(p0, -1.0, -0.5, cylinder_bc(3), ctrl);
  REQUIRE(tr.times.size() == 3);
  const auto snap = tr.radial_snapshot(1);
  CHECK(snap.t == tr.times[1]);
  CHECK(snap.z == tr.grid);
  CHECK(snap.r == tr.states[1]);
  CHECK(snap.dim.value() == 3);
}
