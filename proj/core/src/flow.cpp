#include "mcflab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mcflab/curvature.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/spectral.hpp"

namespace mcflab {

BoundaryCondition BoundaryCondition::pinned(double v) {
  BoundaryCondition b;
  b.kind = Kind::dirichlet;
  b.value = v;
  return b;
}
BoundaryCondition BoundaryCondition::following(
    std::function<double(double)> ref) {
  BoundaryCondition b;
  b.kind = Kind::from_reference;
  b.reference = std::move(ref);
  return b;
}
BoundaryCondition BoundaryCondition::slope(double s) {
  BoundaryCondition b;
  b.kind = Kind::neumann_slope;
  b.value = s;
  return b;
}
BoundaryCondition BoundaryCondition::axis() {
  BoundaryCondition b;
  b.kind = Kind::axis_even;
  return b;
}

namespace {

struct Fd3 {
  std::vector<double> a1, b1, c1, a2, b2, c2;  // 3-point weights per node
};

Fd3 build_fd3(const std::vector<double>& x) {
  const std::size_t n = x.size();
  Fd3 fd;
  fd.a1.assign(n, 0.0);
  fd.b1.assign(n, 0.0);
  fd.c1.assign(n, 0.0);
  fd.a2.assign(n, 0.0);
  fd.b2.assign(n, 0.0);
  fd.c2.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double nodes[3] = {x[i - 1], x[i], x[i + 1]};
    const auto w = fornberg_weights(x[i], nodes, 2);
    fd.a1[i] = w[1][0];
    fd.b1[i] = w[1][1];
    fd.c1[i] = w[1][2];
    fd.a2[i] = w[2][0];
    fd.b2[i] = w[2][1];
    fd.c2[i] = w[2][2];
  }
  return fd;
}

double bc_value(const BoundaryCondition& bc, double t) {
  if (bc.kind == BoundaryCondition::Kind::from_reference) {
    return bc.reference(t);
  }
  return bc.value;
}

bool is_pinned(const BoundaryCondition& bc) {
  return bc.kind == BoundaryCondition::Kind::dirichlet ||
         bc.kind == BoundaryCondition::Kind::from_reference;
}

struct Problem {
  Gauge gauge;
  int n;
  std::vector<double> x;
  Fd3 fd;
  BoundaryPair bc;

  // PDE right-hand side on interior rows (and the axis row); boundary rows 0
  void rhs(double t, const std::vector<double>& u, std::vector<double>& F) const {
    (void)t;
    const std::size_t N = x.size();
    F.assign(N, 0.0);
    std::size_t i0 = 1;
    if (gauge == Gauge::graph &&
        bc.left.kind == BoundaryCondition::Kind::axis_even) {
      const double h1 = x[1] - x[0];
      F[0] = n * 2.0 * (u[1] - u[0]) / (h1 * h1);
    }
    for (std::size_t i = i0; i + 1 < N; ++i) {
      const double ux = fd.a1[i] * u[i - 1] + fd.b1[i] * u[i] + fd.c1[i] * u[i + 1];
      const double uxx = fd.a2[i] * u[i - 1] + fd.b2[i] * u[i] + fd.c2[i] * u[i + 1];
      const double W = 1.0 + ux * ux;
      double f = uxx / W;
      switch (gauge) {
        case Gauge::radial:
          f -= (n - 1) / u[i];
          break;
        case Gauge::graph:
          f += (n - 1) * ux / x[i];
          break;
        case Gauge::rescaled:
          f += -(n - 1) / u[i] + 0.5 * (u[i] - x[i] * ux);
          break;
      }
      F[i] = f;
    }
  }

  void impose_pinned(double t, std::vector<double>& u) const {
    if (is_pinned(bc.left)) u.front() = bc_value(bc.left, t);
    if (is_pinned(bc.right)) u.back() = bc_value(bc.right, t);
    if (bc.left.kind == BoundaryCondition::Kind::neumann_slope) {
      u.front() = u[1] - bc.left.value * (x[1] - x[0]);
    }
    if (bc.right.kind == BoundaryCondition::Kind::neumann_slope) {
      const std::size_t N = x.size();
      u.back() = u[N - 2] + bc.right.value * (x[N - 1] - x[N - 2]);
    }
  }
};

struct Tridiag {
  std::vector<double> lo, di, up, rhs;
  void resize(std::size_t n) {
    lo.assign(n, 0.0);
    di.assign(n, 0.0);
    up.assign(n, 0.0);
    rhs.assign(n, 0.0);
  }
  // Thomas elimination; solution written into rhs
  void solve() {
    const std::size_t n = di.size();
    for (std::size_t i = 1; i < n; ++i) {
      const double m = lo[i] / di[i - 1];
      di[i] -= m * up[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
    }
  }
};

// One SDIRK stage: solve v = base + gh * F(ts, v) with boundary rows
// replaced by their algebraic conditions.  Returns Newton iterations used.
int solve_stage(const Problem& pr, const std::vector<double>& base, double ts,
                double gh, const SolverControl& ctrl, std::vector<double>& v) {
  const std::size_t N = pr.x.size();
  Tridiag sys;
  sys.resize(N);
  std::vector<double> G(N);
  int iters = 0;
  const double floor_u = 0.1 * ctrl.r_min;
  for (; iters < ctrl.max_newton_iters; ++iters) {
    // residual
    double gmax = 0.0;
    {
      // boundary rows
      if (is_pinned(pr.bc.left)) {
        G[0] = v[0] - bc_value(pr.bc.left, ts);
      } else if (pr.bc.left.kind == BoundaryCondition::Kind::neumann_slope) {
        G[0] = (v[1] - v[0]) / (pr.x[1] - pr.x[0]) - pr.bc.left.value;
      } else {  // axis_even PDE row
        const double h1 = pr.x[1] - pr.x[0];
        G[0] = v[0] - base[0] - gh * pr.n * 2.0 * (v[1] - v[0]) / (h1 * h1);
      }
      if (is_pinned(pr.bc.right)) {
        G[N - 1] = v[N - 1] - bc_value(pr.bc.right, ts);
      } else if (pr.bc.right.kind == BoundaryCondition::Kind::neumann_slope) {
        G[N - 1] = (v[N - 1] - v[N - 2]) / (pr.x[N - 1] - pr.x[N - 2]) -
                   pr.bc.right.value;
      } else {
        throw std::invalid_argument("flow: unsupported right boundary kind");
      }
      for (std::size_t i = 1; i + 1 < N; ++i) {
        const double ux =
            pr.fd.a1[i] * v[i - 1] + pr.fd.b1[i] * v[i] + pr.fd.c1[i] * v[i + 1];
        const double uxx =
            pr.fd.a2[i] * v[i - 1] + pr.fd.b2[i] * v[i] + pr.fd.c2[i] * v[i + 1];
        const double W = 1.0 + ux * ux;
        double f = uxx / W;
        switch (pr.gauge) {
          case Gauge::radial:
            f -= (pr.n - 1) / v[i];
            break;
          case Gauge::graph:
            f += (pr.n - 1) * ux / pr.x[i];
            break;
          case Gauge::rescaled:
            f += -(pr.n - 1) / v[i] + 0.5 * (v[i] - pr.x[i] * ux);
            break;
        }
        G[i] = v[i] - base[i] - gh * f;
      }
      for (double g : G) gmax = std::max(gmax, std::fabs(g));
    }
    if (gmax < ctrl.newton_tol) break;

    // Jacobian
    if (is_pinned(pr.bc.left)) {
      sys.di[0] = 1.0;
      sys.up[0] = 0.0;
    } else if (pr.bc.left.kind == BoundaryCondition::Kind::neumann_slope) {
      const double h1 = pr.x[1] - pr.x[0];
      sys.di[0] = -1.0 / h1;
      sys.up[0] = 1.0 / h1;
    } else {
      const double h1 = pr.x[1] - pr.x[0];
      sys.di[0] = 1.0 + gh * pr.n * 2.0 / (h1 * h1);
      sys.up[0] = -gh * pr.n * 2.0 / (h1 * h1);
    }
    if (is_pinned(pr.bc.right)) {
      sys.di[N - 1] = 1.0;
      sys.lo[N - 1] = 0.0;
    } else {
      const double h1 = pr.x[N - 1] - pr.x[N - 2];
      sys.di[N - 1] = 1.0 / h1;
      sys.lo[N - 1] = -1.0 / h1;
    }
    for (std::size_t i = 1; i + 1 < N; ++i) {
      const double ux =
          pr.fd.a1[i] * v[i - 1] + pr.fd.b1[i] * v[i] + pr.fd.c1[i] * v[i + 1];
      const double uxx =
          pr.fd.a2[i] * v[i - 1] + pr.fd.b2[i] * v[i] + pr.fd.c2[i] * v[i + 1];
      const double W = 1.0 + ux * ux;
      double dF_dux = -2.0 * ux * uxx / (W * W);
      const double dF_duxx = 1.0 / W;
      double dF_direct = 0.0;
      switch (pr.gauge) {
        case Gauge::radial:
          dF_direct = (pr.n - 1) / (v[i] * v[i]);
          break;
        case Gauge::graph:
          dF_dux += (pr.n - 1) / pr.x[i];
          break;
        case Gauge::rescaled:
          dF_direct = (pr.n - 1) / (v[i] * v[i]) + 0.5;
          dF_dux += -0.5 * pr.x[i];
          break;
      }
      sys.lo[i] = -gh * (dF_dux * pr.fd.a1[i] + dF_duxx * pr.fd.a2[i]);
      sys.di[i] = 1.0 - gh * (dF_dux * pr.fd.b1[i] + dF_duxx * pr.fd.b2[i] +
                              dF_direct);
      sys.up[i] = -gh * (dF_dux * pr.fd.c1[i] + dF_duxx * pr.fd.c2[i]);
    }
    sys.rhs = G;
    sys.solve();
    for (std::size_t i = 0; i < N; ++i) {
      v[i] -= sys.rhs[i];
      if (pr.gauge != Gauge::graph && v[i] < floor_u) v[i] = floor_u;
    }
  }
  if (iters >= ctrl.max_newton_iters) {
    throw std::runtime_error("flow: Newton iteration did not converge");
  }
  return iters + 1;
}

FlowTrajectory evolve_impl(Gauge gauge, Dimension dim,
                           const std::vector<double>& grid,
                           const std::vector<double>& u0, bool has_axis,
                           double t0, double t1, const BoundaryPair& bc,
                           const SolverControl& ctrl) {
  if (!(t1 > t0)) throw std::invalid_argument("flow: need t1 > t0");
  if (!(ctrl.dt > 0.0)) throw std::invalid_argument("flow: need dt > 0");
  if (gauge == Gauge::graph) {
    if (has_axis && bc.left.kind != BoundaryCondition::Kind::axis_even) {
      throw std::invalid_argument("flow: axis grid needs an axis_even left bc");
    }
    if (!has_axis && bc.left.kind == BoundaryCondition::Kind::axis_even) {
      throw std::invalid_argument("flow: axis_even bc needs a grid at r = 0");
    }
  } else if (bc.left.kind == BoundaryCondition::Kind::axis_even ||
             bc.right.kind == BoundaryCondition::Kind::axis_even) {
    throw std::invalid_argument("flow: axis_even bc is graph-gauge only");
  }

  Problem pr{gauge, dim, grid, build_fd3(grid), bc};
  const double gamma = 1.0 - std::sqrt(0.5);  // L-stable SDIRK2

  FlowTrajectory tr;
  tr.gauge = gauge;
  tr.dim = dim;
  tr.grid = grid;
  tr.bc = bc;
  tr.has_axis = has_axis;

  std::vector<double> u = u0;
  pr.impose_pinned(t0, u);
  tr.times.push_back(t0);
  tr.states.push_back(u);

  const std::size_t nsteps =
      static_cast<std::size_t>(std::ceil((t1 - t0) / ctrl.dt - 1e-12));
  std::vector<double> F0, F1, base, v, u_new;
  for (std::size_t s = 0; s < nsteps; ++s) {
    const double t = t0 + (t1 - t0) * static_cast<double>(s) /
                              static_cast<double>(nsteps);
    const double tn = t0 + (t1 - t0) * static_cast<double>(s + 1) /
                               static_cast<double>(nsteps);
    const double h = tn - t;
    if (ctrl.implicit_scheme) {
      // stage 1 at t + gamma h
      v = u;
      const int it1 = solve_stage(pr, u, t + gamma * h, gamma * h, ctrl, v);
      // k1 = (v - u)/(gamma h); base2 = u + (1-gamma) h k1
      base.resize(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        base[i] = u[i] + (1.0 - gamma) / gamma * (v[i] - u[i]);
      }
      u_new = v;
      const int it2 = solve_stage(pr, base, tn, gamma * h, ctrl, u_new);
      tr.max_newton_iters = std::max(tr.max_newton_iters, std::max(it1, it2));
    } else {
      // explicit RK4 with pinned values re-imposed at each stage
      auto eval = [&](double ts, const std::vector<double>& y,
                      std::vector<double>& F) {
        std::vector<double> tmp = y;
        pr.impose_pinned(ts, tmp);
        pr.rhs(ts, tmp, F);
      };
      std::vector<double> k1, k2, k3, k4, tmp(u.size());
      eval(t, u, k1);
      for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
      eval(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
      eval(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + h * k3[i];
      eval(tn, tmp, k4);
      u_new = u;
      for (std::size_t i = 0; i < u.size(); ++i) {
        u_new[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      pr.impose_pinned(tn, u_new);
    }

    // trapezoidal consistency residual on PDE rows
    pr.rhs(t, u, F0);
    pr.rhs(tn, u_new, F1);
    double res = 0.0;
    const std::size_t lo =
        (gauge == Gauge::graph &&
         bc.left.kind == BoundaryCondition::Kind::axis_even)
            ? 0
            : 1;
    for (std::size_t i = lo; i + 1 < u.size(); ++i) {
      res = std::max(res, std::fabs((u_new[i] - u[i]) / h -
                                    0.5 * (F0[i] + F1[i])));
    }
    tr.max_residual = std::max(tr.max_residual, res);

    u = u_new;
    ++tr.steps;

    // pinch detection
    if (gauge != Gauge::graph) {
      const auto mn = std::min_element(u.begin(), u.end());
      if (*mn <= ctrl.r_min) {
        tr.halt = PinchHalt{tn, static_cast<std::size_t>(mn - u.begin())};
        tr.times.push_back(tn);
        tr.states.push_back(u);
        return tr;
      }
    }

    const bool last = (s + 1 == nsteps);
    if (last || (ctrl.snapshot_every != 0 && (s + 1) % ctrl.snapshot_every == 0)) {
      tr.times.push_back(tn);
      tr.states.push_back(u);
    }
  }
  return tr;
}

}  // namespace

FlowTrajectory evolve_radial(const RadialProfile& p0, double t0, double t1,
                             const BoundaryPair& bc, const SolverControl& ctrl) {
  p0.validate();
  return evolve_impl(Gauge::radial, p0.dim, p0.z, p0.r, false, t0, t1, bc, ctrl);
}

FlowTrajectory evolve_graph(const GraphProfile& p0, double t0, double t1,
                            const BoundaryPair& bc, const SolverControl& ctrl) {
  p0.validate();
  return evolve_impl(Gauge::graph, p0.dim, p0.r, p0.f, p0.has_axis, t0, t1, bc,
                     ctrl);
}

FlowTrajectory evolve_rescaled(const RadialProfile& rho0, double tau0,
                               double tau1, const BoundaryPair& bc,
                               const SolverControl& ctrl) {
  rho0.validate();
  return evolve_impl(Gauge::rescaled, rho0.dim, rho0.z, rho0.r, false, tau0,
                     tau1, bc, ctrl);
}

RadialProfile FlowTrajectory::radial_snapshot(std::size_t i) const {
  if (gauge == Gauge::graph) {
    throw std::invalid_argument("radial_snapshot: trajectory is graph-gauge");
  }
  RadialProfile p;
  p.dim = dim;
  p.t = times.at(i);
  p.z = grid;
  p.r = states.at(i);
  return p;
}

GraphProfile FlowTrajectory::graph_snapshot(std::size_t i) const {
  if (gauge != Gauge::graph) {
    throw std::invalid_argument("graph_snapshot: trajectory is not graph-gauge");
  }
  GraphProfile p;
  p.dim = dim;
  p.t = times.at(i);
  p.r = grid;
  p.f = states.at(i);
  p.has_axis = has_axis;
  return p;
}

std::vector<std::pair<double, double>> h_max_series(const FlowTrajectory& tr) {
  if (tr.gauge == Gauge::rescaled) {
    throw std::invalid_argument("h_max_series: radial or graph gauge only");
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    CurvatureReport rep = (tr.gauge == Gauge::radial)
                              ? curvature_of_radial(tr.radial_snapshot(k))
                              : curvature_of_graph(tr.graph_snapshot(k));
    double hmax = -1e300;
    for (std::size_t i = 0; i < rep.H.size(); ++i) {
      if (!rep.one_sided[i]) hmax = std::max(hmax, rep.H[i]);
    }
    out.emplace_back(tr.times[k], hmax);
  }
  return out;
}

std::vector<std::vector<double>> speed_profiles(const FlowTrajectory& tr) {
  Problem pr{tr.gauge, tr.dim, tr.grid, build_fd3(tr.grid), tr.bc};
  std::vector<std::vector<double>> out;
  out.reserve(tr.times.size());
  std::vector<double> F;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    pr.rhs(tr.times[k], tr.states[k], F);
    // boundary rows: numeric time derivative of the pinned value
    const double dt = 1e-6;
    if (is_pinned(tr.bc.left)) {
      F.front() = (bc_value(tr.bc.left, tr.times[k] + dt) -
                   bc_value(tr.bc.left, tr.times[k] - dt)) /
                  (2.0 * dt);
    }
    if (is_pinned(tr.bc.right)) {
      F.back() = (bc_value(tr.bc.right, tr.times[k] + dt) -
                  bc_value(tr.bc.right, tr.times[k] - dt)) /
                 (2.0 * dt);
    }
    out.push_back(F);
  }
  return out;
}

VanishingTimeTable vanishing_time(const FlowTrajectory& tr) {
  if (tr.gauge != Gauge::radial) {
    throw std::invalid_argument("vanishing_time: radial gauge only");
  }
  if (tr.times.empty()) {
    throw std::invalid_argument("vanishing_time: empty trajectory");
  }
  VanishingTimeTable out;
  out.z = tr.grid;
  const double t_end = tr.times.back();
  const auto& r = tr.states.back();
  out.T.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    out.T[i] = t_end + r[i] * r[i] / (2.0 * (tr.dim - 1));
  }
  return out;
}

EnclosureReport enclosure_check(const RadialProfile& inner,
                                const RadialProfile& outer) {
  inner.validate();
  outer.validate();
  const double lo = std::max(inner.z.front(), outer.z.front());
  const double hi = std::min(inner.z.back(), outer.z.back());
  if (!(hi > lo)) {
    throw std::invalid_argument("enclosure_check: empty axial overlap");
  }
  const Pchip outer_r = Pchip::fit(outer.z, outer.r);
  EnclosureReport rep;
  rep.z_lo = lo;
  rep.z_hi = hi;
  rep.min_margin = 1e300;
  for (std::size_t i = 0; i < inner.z.size(); ++i) {
    if (inner.z[i] < lo || inner.z[i] > hi) continue;
    rep.min_margin = std::min(rep.min_margin, outer_r(inner.z[i]) - inner.r[i]);
    ++rep.samples;
  }
  if (rep.samples == 0) {
    throw std::invalid_argument("enclosure_check: no inner sample in overlap");
  }
  return rep;
}

MonotoneSeries monotone_quantity_series(const FlowTrajectory& tr,
                                        MonotoneQuantity which) {
  MonotoneSeries out;
  out.time = tr.times;
  const std::size_t nt = tr.times.size();
  out.value.resize(nt);
  switch (which) {
    case MonotoneQuantity::gaussian_area: {
      if (tr.gauge != Gauge::rescaled) {
        throw std::invalid_argument("gaussian_area needs the rescaled gauge");
      }
      const int n = tr.dim;
      for (std::size_t k = 0; k < nt; ++k) {
        const auto& rho = tr.states[k];
        const auto d = derivatives(tr.grid, rho, 4);
        std::vector<double> integrand(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) {
          integrand[i] = std::pow(rho[i], n - 1) *
                         std::sqrt(1.0 + d.d1[i] * d.d1[i]) *
                         std::exp(-(tr.grid[i] * tr.grid[i] +
                                    rho[i] * rho[i]) / 4.0);
        }
        out.value[k] =
            unit_sphere_area(n - 1) * composite_integral(tr.grid, integrand);
      }
      const double factor = unit_sphere_area(n - 1) *
                            std::pow(2.0 * (n - 1), 0.5 * (n - 1)) *
                            std::exp(-0.5 * (n - 1));
      out.tail_correction =
          factor * std::sqrt(std::numbers::pi) *
          (std::erfc(tr.grid.back() / 2.0) + std::erfc(-tr.grid.front() / 2.0));
      break;
    }
    case MonotoneQuantity::rr_z_profile: {
      if (tr.gauge != Gauge::radial) {
        throw std::invalid_argument("rr_z_profile needs the radial gauge");
      }
      for (std::size_t k = 0; k < nt; ++k) {
        const auto& r = tr.states[k];
        const auto d = derivatives(tr.grid, r, 4);
        std::size_t j = r.size() - 1;
        while (j > 0 && d.one_sided[j]) --j;
        out.value[k] = r[j] * d.d1[j];
      }
      break;
    }
    case MonotoneQuantity::f_t_profile: {
      if (tr.gauge != Gauge::graph) {
        throw std::invalid_argument("f_t_profile needs the graph gauge");
      }
      const auto speeds = speed_profiles(tr);
      for (std::size_t k = 0; k < nt; ++k) {
        double mn = 1e300;
        for (std::size_t i = 0; i + 1 < speeds[k].size(); ++i) {
          if (i == 0 && !tr.has_axis) continue;
          mn = std::min(mn, speeds[k][i]);
        }
        out.value[k] = mn;
      }
      break;
    }
  }
  for (std::size_t k = 1; k < nt; ++k) {
    const double diff = out.value[k] - out.value[k - 1];
    out.max_increase = std::max(out.max_increase, diff);
    out.max_decrease = std::min(out.max_decrease, diff);
  }
  return out;
}

}  // namespace mcflab
