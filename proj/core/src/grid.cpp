#include "mcflab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcflab {

std::vector<double> uniform_grid(double a, double b, std::size_t count) {
  if (count < 2) throw std::invalid_argument("uniform_grid: count < 2");
  if (!(b > a)) throw std::invalid_argument("uniform_grid: need b > a");
  std::vector<double> x(count);
  const double h = (b - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) x[i] = a + h * static_cast<double>(i);
  x.back() = b;
  return x;
}

std::vector<std::vector<double>> fornberg_weights(double x0,
                                                 std::span<const double> nodes,
                                                 int m) {
  const int nn = static_cast<int>(nodes.size());
  if (nn == 0) throw std::invalid_argument("fornberg_weights: no nodes");
  if (m < 0 || m >= nn) {
    throw std::invalid_argument("fornberg_weights: need 0 <= m < #nodes");
  }
  // B. Fornberg's one-pass recursion; c[k][j] accumulates the weight of
  // node j for the k-th derivative using nodes 0..i at stage i.
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(nn, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < nn; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

DerivativeTable derivatives(std::span<const double> x,
                            std::span<const double> y, int order) {
  if (order != 2 && order != 4) {
    throw std::invalid_argument("derivatives: order must be 2 or 4");
  }
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("derivatives: size mismatch");
  const std::size_t interior_w = static_cast<std::size_t>(order) + 1;
  const std::size_t boundary_w = static_cast<std::size_t>(order) + 2;
  if (n < boundary_w) {
    throw std::invalid_argument("derivatives: grid too short for the order");
  }
  DerivativeTable out;
  out.d1.resize(n);
  out.d2.resize(n);
  out.one_sided.assign(n, 0);
  const std::size_t half = interior_w / 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo, w;
    bool one_sided = false;
    if (i >= half && i + half < n) {
      lo = i - half;
      w = interior_w;
    } else {
      // widen one-sided stencils by one node so the second derivative keeps
      // the nominal order at the ends
      one_sided = true;
      w = boundary_w;
      lo = (i < half) ? 0 : n - w;
    }
    const auto wts = fornberg_weights(x[i], x.subspan(lo, w), 2);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      d1 += wts[1][j] * y[lo + j];
      d2 += wts[2][j] * y[lo + j];
    }
    out.d1[i] = d1;
    out.d2[i] = d2;
    out.one_sided[i] = one_sided ? 1 : 0;
  }
  return out;
}

double even_second_derivative(std::span<const double> x,
                              std::span<const double> y, int order) {
  if (order != 2 && order != 4) {
    throw std::invalid_argument("even_second_derivative: order must be 2 or 4");
  }
  if (x.empty() || x[0] != 0.0) {
    throw std::invalid_argument("even_second_derivative: x[0] must be 0");
  }
  // side = order/2 keeps the nominal accuracy and, for order 2, reproduces
  // the flow solver's axis row 2(y1 - y0)/h^2 so the two agree to rounding
  const std::size_t side = static_cast<std::size_t>(order / 2);
  if (x.size() < side + 1) {
    throw std::invalid_argument("even_second_derivative: grid too short");
  }
  std::vector<double> nodes, vals;
  for (std::size_t k = side; k >= 1; --k) {
    nodes.push_back(-x[k]);
    vals.push_back(y[k]);
  }
  for (std::size_t k = 0; k <= side; ++k) {
    nodes.push_back(x[k]);
    vals.push_back(y[k]);
  }
  const auto wts = fornberg_weights(0.0, nodes, 2);
  double d2 = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) d2 += wts[2][j] * vals[j];
  return d2;
}

Pchip Pchip::fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("Pchip: bad input");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) {
      throw std::invalid_argument("Pchip: x not strictly increasing");
    }
  }
  Pchip p;
  p.x_.assign(x.begin(), x.end());
  p.y_.assign(y.begin(), y.end());
  p.d_.assign(n, 0.0);
  if (n == 2) {
    const double s = (y[1] - y[0]) / (x[1] - x[0]);
    p.d_[0] = p.d_[1] = s;
    return p;
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  // Fritsch-Carlson interior slopes: weighted harmonic mean, zero at local
  // extrema, so monotone data stays monotone.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] == 0.0 || delta[i] == 0.0 ||
        (delta[i - 1] > 0.0) != (delta[i] > 0.0)) {
      p.d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      p.d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // shape-preserving three-point end slopes with the usual clipping
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) {
      s = 0.0;
    } else if (d0 * d1 < 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  p.d_.front() = end_slope(h[0], h[1], delta[0], delta[1]);
  p.d_.back() = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return p;
}

std::size_t Pchip::segment(double t) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  if (i >= x_.size()) return x_.size() - 2;
  return i - 1;
}

double Pchip::operator()(double t) const {
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double Pchip::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double g00 = 6.0 * s * (s - 1.0) / h;
  const double g10 = (3.0 * s - 1.0) * (s - 1.0);
  const double g01 = -g00;
  const double g11 = s * (3.0 * s - 2.0);
  return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

}  // namespace mcflab
