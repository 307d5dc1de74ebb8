#include "mcflab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mcflab/ode.hpp"

namespace mcflab {

double cylinder_radius(Dimension n, double t) {
  if (!(t < 0.0)) {
    throw std::invalid_argument("cylinder_radius: requires t < 0");
  }
  return std::sqrt(2.0 * (n - 1) * (-t));
}

double sphere_radius(Dimension n, double r0, double t) {
  const double sq = r0 * r0 - 2.0 * n * t;
  if (!(sq > 0.0)) {
    throw std::invalid_argument("sphere_radius: sphere has already vanished");
  }
  return std::sqrt(sq);
}

double BowlSoliton::height(double r) const {
  const auto& rs = profile.r;
  const auto& fs = profile.f;
  const auto& gs = slope_table;
  if (rs.size() < 3 || r <= rs[1]) {
    // series through the axis: f = c r^2/(2n) + c^3 r^4/(4 n^3 (n+2))
    const int n = dim;
    return c * r * r / (2.0 * n) +
           std::pow(c, 3) * std::pow(r, 4) / (4.0 * std::pow(n, 3) * (n + 2));
  }
  if (r >= rs.back()) {  // linear continuation past the table
    return fs.back() + gs.back() * (r - rs.back());
  }
  // Cubic Hermite piece on the integrator table: exact nodal slopes keep
  // the interpolant's curvature faithful near the tip, where a value-only
  // fit wiggles at the f'' level and downstream stencils would see it.
  const auto it = std::upper_bound(rs.begin() + 1, rs.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - rs.begin()) - 1;
  const double h = rs[i + 1] - rs[i];
  const double s = (r - rs[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * fs[i] + (s3 - 2 * s2 + s) * h * gs[i] +
         (-2 * s3 + 3 * s2) * fs[i + 1] + (s3 - s2) * h * gs[i + 1];
}

double BowlSoliton::slope(double r) const {
  if (r <= g_interp_.x_front()) {
    const int n = dim;
    return c * r / n + std::pow(c, 3) * std::pow(r, 3) /
                           (std::pow(n, 3) * (n + 2));
  }
  return g_interp_(r);
}

double BowlSoliton::slope_ratio_model(double r) const {
  return c / (dim - 1) - 1.0 / (c * r * r);
}

BowlSoliton solve_bowl(Dimension n, double c, double r_max, double tol) {
  if (!(c > 0.0) || !(r_max > 1.0)) {
    throw std::invalid_argument("solve_bowl: need c > 0 and r_max > 1");
  }
  const double r0 = 1e-3;  // series start past the coordinate singularity
  const int nn = n;
  // state (f, g = f_r); g' = (1+g^2)(c - (n-1) g / r)
  OdeRhs rhs = [nn, c](double r, std::span<const double> y,
                       std::span<double> dy) {
    const double g = y[1];
    dy[0] = g;
    dy[1] = (1.0 + g * g) * (c - (nn - 1) * g / r);
  };
  const double g0 = c * r0 / nn +
                    std::pow(c, 3) * std::pow(r0, 3) /
                        (std::pow(nn, 3) * (nn + 2));
  const double f0 = c * r0 * r0 / (2.0 * nn) +
                    std::pow(c, 3) * std::pow(r0, 4) /
                        (4.0 * std::pow(nn, 3) * (nn + 2));
  AdaptiveOptions opt;
  opt.rtol = tol;
  opt.atol = tol;
  opt.h_init = 1e-4;
  opt.h_max = 0.01;  // keeps the stored table dense enough for interpolation
  const double y0[2] = {f0, g0};
  const auto sol = dp5_integrate(rhs, y0, r0, r_max, opt);
  if (sol.step_failure) throw std::runtime_error("solve_bowl: step failure");

  BowlSoliton bowl;
  bowl.dim = n;
  bowl.c = c;
  bowl.tip_second_derivative = c / nn;

  const std::size_t m = sol.x.size();
  std::vector<double> rg, fg, gg;
  rg.reserve(m + 1);
  fg.reserve(m + 1);
  gg.reserve(m + 1);
  rg.push_back(0.0);
  fg.push_back(0.0);
  gg.push_back(0.0);
  for (std::size_t i = 0; i < m; ++i) {
    rg.push_back(sol.x[i]);
    fg.push_back(sol.y[i][0]);
    gg.push_back(sol.y[i][1]);
  }
  bowl.profile.dim = n;
  bowl.profile.t = 0.0;
  bowl.profile.r = rg;
  bowl.profile.f = fg;
  bowl.profile.has_axis = true;
  bowl.slope_table = gg;
  bowl.slope_ratio_at_rmax = gg.back() / r_max;
  bowl.g_interp_ = Pchip::fit(std::span(rg).subspan(1), std::span(gg).subspan(1));

  // independent residual: 4th-order finite differences of the height table
  // against the translator equation (skip the irregular spacing at the start)
  std::size_t first = 0;
  while (first < rg.size() && rg[first] < 1.0) ++first;
  std::vector<double> rr(rg.begin() + first, rg.end());
  std::vector<double> ff(fg.begin() + first, fg.end());
  const auto d = derivatives(rr, ff, 4);
  double res = 0.0;
  for (std::size_t i = 0; i < rr.size(); ++i) {
    if (d.one_sided[i]) continue;
    const double e = d.d2[i] / (1.0 + d.d1[i] * d.d1[i]) +
                     (nn - 1) * d.d1[i] / rr[i] - c;
    res = std::max(res, std::fabs(e));
  }
  bowl.max_ode_residual = res;
  if (res > 1e-6) {
    throw std::runtime_error("solve_bowl: residual check failed");
  }
  return bowl;
}

double ShrinkerProfile::radius(double yv) const {
  if (yv < 0.0 || yv > a) {
    throw std::invalid_argument("ShrinkerProfile::radius: y outside [0, a]");
  }
  if (yv <= y_cap_) return u_of_y_(yv);
  // cap model: u' -> -inf at the tip; u(y) = sqrt(2 (a - y)/k) + O((a-y)^{3/2})
  return std::sqrt(std::max(0.0, 2.0 * (a - yv) / tip_curvature));
}

ShrinkerProfile solve_shrinker(Dimension n, double a, double tol,
                               double a_min) {
  if (!(a >= a_min)) {
    throw std::invalid_argument("solve_shrinker: a below a_min");
  }
  const int nn = n;
  const double k = a / (2.0 * nn);  // cap curvature at the tip
  // arclength system from the tip toward the symmetry plane:
  //   dy/ds = -cos(phi), du/ds = -sin(phi),
  //   dphi/ds = -[(n-1) cos(phi)/u - (u cos(phi) - y sin(phi))/2]
  OdeRhs rhs = [nn](double, std::span<const double> y, std::span<double> dy) {
    const double c = std::cos(y[2]);
    const double s = std::sin(y[2]);
    dy[0] = -c;
    dy[1] = -s;
    dy[2] = -((nn - 1) * c / y[1] - (y[1] * c - y[0] * s) / 2.0);
  };
  // series start just off the tip
  const double s0 = 1e-8;
  const double y0[3] = {a - 0.5 * k * s0 * s0, s0, -std::numbers::pi / 2 + k * s0};
  AdaptiveOptions opt;
  opt.rtol = tol;
  opt.atol = tol;
  // start at the step cap: the right-hand side is regular at the tip, and a
  // uniform table (no startup ramp) keeps the finite-difference residual
  // check below from paying for abruptly varying spacing
  opt.h_init = 7.5e-4;
  opt.h_max = 7.5e-4;
  OdeEvent stop_at_plane;
  stop_at_plane.value = [](double, std::span<const double> y) { return y[0]; };
  stop_at_plane.direction = -1;
  const auto sol =
      dp5_integrate(rhs, y0, 0.0, 10.0 * a + 50.0, opt, &stop_at_plane);
  if (sol.step_failure || !sol.event_hit) {
    throw std::runtime_error("solve_shrinker: tip integration failed");
  }

  ShrinkerProfile sp;
  sp.dim = n;
  sp.a = a;
  sp.tip_curvature = k;
  const std::size_t m = sol.x.size();
  sp.y.reserve(m + 1);
  sp.u.reserve(m + 1);
  sp.phi.reserve(m + 1);
  for (std::size_t i = m; i-- > 0;) {  // reverse: y ascending, tip last
    sp.y.push_back(sol.y[i][0]);
    sp.u.push_back(sol.y[i][1]);
    sp.phi.push_back(sol.y[i][2]);
  }
  sp.y.push_back(a);
  sp.u.push_back(0.0);
  sp.phi.push_back(-std::numbers::pi / 2);
  sp.y.front() = 0.0;  // event landed at y = 0 to refinement tolerance
  sp.u_at_origin = sp.u.front();
  sp.slope_at_origin = std::tan(sp.phi.front());

  // interpolation table in y, capped before the vertical tangent
  std::size_t cap = sp.y.size() - 1;
  while (cap > 0 && std::fabs(std::cos(sp.phi[cap - 1])) < 0.1) --cap;
  sp.y_cap_ = sp.y[cap - 1];
  sp.u_of_y_ = Pchip::fit(std::span(sp.y).first(cap),
                          std::span(sp.u).first(cap));

  // independent residual: 4th-order finite differences of the arclength
  // table against the first-order system. Differencing in arclength keeps
  // every derivative O(a) and covers the cap, where a residual in y would
  // run into the vertical tangent.
  {
    std::vector<double> ss(sol.x.begin(), sol.x.end());
    std::vector<double> ys(m), us(m), ps(m);
    for (std::size_t i = 0; i < m; ++i) {
      ys[i] = sol.y[i][0];
      us[i] = sol.y[i][1];
      ps[i] = sol.y[i][2];
    }
    const auto dy = derivatives(ss, ys, 4);
    const auto du = derivatives(ss, us, 4);
    const auto dp = derivatives(ss, ps, 4);
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (dy.one_sided[i]) continue;
      const double c = std::cos(ps[i]);
      const double s = std::sin(ps[i]);
      res = std::max(res, std::fabs(dy.d1[i] + c));
      res = std::max(res, std::fabs(du.d1[i] + s));
      res = std::max(res, std::fabs(dp.d1[i] + (nn - 1) * c / us[i] -
                                    (us[i] * c - ys[i] * s) / 2.0));
    }
    sp.max_ode_residual = res;
  }

  // concavity of u(y) over the capped flank (the FD noise there cannot flip
  // the strongly negative u'' of the cap itself)
  std::vector<double> yy(sp.y.begin(), sp.y.begin() + cap);
  std::vector<double> uu(sp.u.begin(), sp.u.begin() + cap);
  const auto d = derivatives(yy, uu, 4);
  bool concave = true;
  for (std::size_t i = 0; i < yy.size(); ++i) {
    if (d.one_sided[i]) continue;
    if (d.d2[i] > 1e-10) concave = false;
  }
  sp.concave = concave;

  // neck bound with the O(a^-2) symmetry-plane allowance (the profile sits
  // ~2/a^2 above the cylinder at y = 0)
  const double bound = std::sqrt(2.0 * (nn - 1)) + 3.0 / (a * a);
  for (double uv : sp.u) {
    if (uv > bound) {
      throw std::runtime_error("solve_shrinker: profile above the allowed band");
    }
  }
  return sp;
}

RadialProfile shrinker_barrier_at(const ShrinkerProfile& s, double K, double t,
                                  std::size_t nodes) {
  if (!(t < 0.0)) {
    throw std::invalid_argument("shrinker_barrier_at: requires t < 0");
  }
  if (nodes < 5) {
    throw std::invalid_argument("shrinker_barrier_at: need at least 5 nodes");
  }
  const double scale = std::sqrt(-t);
  const double y_hi = s.a * (1.0 - 1e-3);  // trim the exact tip (radius 0)
  RadialProfile p;
  p.dim = s.dim;
  p.t = t;
  p.z.resize(nodes);
  p.r.resize(nodes);
  const double zc = K * s.a * s.a;
  for (std::size_t i = 0; i < nodes; ++i) {
    // y descends from y_hi to 0 as z ascends to K a^2
    const double y =
        y_hi * (1.0 - static_cast<double>(i) / static_cast<double>(nodes - 1));
    p.z[i] = zc - y * scale;
    p.r[i] = scale * s.radius(y);
  }
  p.validate();
  return p;
}

}  // namespace mcflab
