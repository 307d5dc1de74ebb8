#include "mcflab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcflab {

namespace {

void rk4_step(const OdeRhs& rhs, double x, double h, std::vector<double>& y,
              std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
  const std::size_t n = y.size();
  rhs(x, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(x + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(x + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(x + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace

FixedStepSolution rk4_integrate(const OdeRhs& rhs, std::span<const double> y0,
                                double x0, double x1, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("rk4_integrate: steps == 0");
  const std::size_t n = y0.size();
  FixedStepSolution sol;
  sol.x.reserve(steps + 1);
  sol.y.reserve(steps + 1);
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  sol.x.push_back(x0);
  sol.y.push_back(y);
  const double h = (x1 - x0) / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const double x = x0 + h * static_cast<double>(s);
    rk4_step(rhs, x, h, y, k1, k2, k3, k4, tmp);
    sol.x.push_back((s + 1 == steps) ? x1 : x + h);
    sol.y.push_back(y);
  }
  return sol;
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113,
                           125.0 / 192,     -2187.0 / 6784,
                           11.0 / 84,       0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200,
                           187.0 / 2100,    1.0 / 40};

struct HermiteSeg {
  double x0, x1;
  std::vector<double> y0, y1, f0, f1;
  void eval(double x, std::vector<double>& out) const {
    const double h = x1 - x0;
    const double s = (x - x0) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    out.resize(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) {
      out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
    }
  }
};

}  // namespace

AdaptiveSolution dp5_integrate(const OdeRhs& rhs, std::span<const double> y0,
                               double x0, double x1, const AdaptiveOptions& opt,
                               const OdeEvent* event) {
  const std::size_t n = y0.size();
  const double dir = (x1 >= x0) ? 1.0 : -1.0;
  AdaptiveSolution sol;
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<std::vector<double>> k(7, std::vector<double>(n));
  std::vector<double> ytmp(n), y5(n), y4(n);
  sol.x.push_back(x0);
  sol.y.push_back(y);

  double x = x0;
  double h = dir * std::min(std::fabs(opt.h_init), std::fabs(opt.h_max));
  rhs(x, y, k[0]);  // FSAL seed
  double ev_prev = event ? event->value(x, y) : 0.0;

  while (dir * (x1 - x) > 0.0) {
    if (++sol.steps_taken > opt.max_steps) {
      sol.step_failure = true;
      return sol;
    }
    if (dir * (x + h - x1) > 0.0) h = x1 - x;

    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
        ytmp[i] = y[i] + h * acc;
      }
      rhs(x + kC[s] * h, ytmp, k[s]);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc5 = 0.0, acc4 = 0.0;
      for (int s = 0; s < 7; ++s) {
        acc5 += kB5[s] * k[s][i];
        acc4 += kB4[s] * k[s][i];
      }
      y5[i] = y[i] + h * acc5;
      y4[i] = y[i] + h * acc4;
      const double sc =
          opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      const double e = (y5[i] - y4[i]) / sc;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err <= 1.0) {
      HermiteSeg seg;
      if (event) {
        seg.x0 = x;
        seg.x1 = x + h;
        seg.y0 = y;
        seg.y1 = y5;
        seg.f0 = k[0];
        seg.f1 = k[6];  // k7 = f(x+h, y5), the FSAL stage
      }
      x += h;
      y = y5;
      k[0] = k[6];
      sol.x.push_back(x);
      sol.y.push_back(y);

      if (event) {
        const double ev_now = event->value(x, y);
        const bool crossed =
            (ev_prev <= 0.0 && ev_now > 0.0 && event->direction >= 0) ||
            (ev_prev >= 0.0 && ev_now < 0.0 && event->direction <= 0) ||
            (ev_prev == 0.0 && ev_now == 0.0);
        if (crossed && ev_prev != ev_now) {
          double lo = seg.x0, hi = seg.x1;
          double flo = ev_prev;
          std::vector<double> ymid;
          for (int it = 0; it < 200 && hi - lo > 1e-15 * std::fabs(hi) + 1e-300;
               ++it) {
            const double mid = 0.5 * (lo + hi);
            seg.eval(mid, ymid);
            const double fm = event->value(mid, ymid);
            if ((flo <= 0.0) == (fm <= 0.0)) {
              lo = mid;
              flo = fm;
            } else {
              hi = mid;
            }
          }
          seg.eval(hi, ymid);
          sol.x.back() = hi;
          sol.y.back() = ymid;
          sol.event_hit = true;
          return sol;
        }
        ev_prev = ev_now;
      }
    }
    double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    h *= fac;
    if (std::fabs(h) > opt.h_max) h = dir * opt.h_max;
    if (!(std::fabs(h) > 0.0) || x + h == x) {
      sol.step_failure = true;
      return sol;
    }
  }
  return sol;
}

}  // namespace mcflab
