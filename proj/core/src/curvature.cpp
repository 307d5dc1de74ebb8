#include "mcflab/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcflab/grid.hpp"

namespace mcflab {

CurvatureReport curvature_of_radial(const RadialProfile& p) {
  p.validate();
  const std::size_t n = p.z.size();
  const int dim = p.dim;
  const auto d = derivatives(p.z, p.r, p.stencil_order);
  CurvatureReport rep;
  rep.kappa_axial.resize(n);
  rep.kappa_rotational.resize(n);
  rep.H.resize(n);
  rep.A_norm_sq.resize(n);
  rep.one_sided = d.one_sided;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 + d.d1[i] * d.d1[i];
    const double sq = std::sqrt(w);
    const double ka = -d.d2[i] / (w * sq);
    const double kr = 1.0 / (p.r[i] * sq);
    rep.kappa_axial[i] = ka;
    rep.kappa_rotational[i] = kr;
    rep.H[i] = ka + (dim - 1) * kr;
    rep.A_norm_sq[i] = ka * ka + (dim - 1) * kr * kr;
  }
  return rep;
}

CurvatureReport curvature_of_graph(const GraphProfile& p) {
  p.validate();
  const std::size_t n = p.r.size();
  const int dim = p.dim;
  const auto d = derivatives(p.r, p.f, p.stencil_order);
  if (p.has_axis) {
    double slope_scale = 0.0;
    for (double v : d.d1) slope_scale = std::max(slope_scale, std::fabs(v));
    if (std::fabs(d.d1.front()) > 1e-3 * (1.0 + slope_scale)) {
      throw std::invalid_argument(
          "curvature_of_graph: tip not smooth (f_r(0) != 0)");
    }
  }
  CurvatureReport rep;
  rep.kappa_axial.resize(n);
  rep.kappa_rotational.resize(n);
  rep.H.resize(n);
  rep.A_norm_sq.resize(n);
  rep.one_sided = d.one_sided;
  std::size_t start = 0;
  if (p.has_axis) {
    const double frr0 = even_second_derivative(p.r, p.f, p.stencil_order);
    rep.kappa_axial[0] = frr0;
    rep.kappa_rotational[0] = frr0;  // f_r/r -> f_rr(0)
    rep.H[0] = dim * frr0;
    rep.A_norm_sq[0] = dim * frr0 * frr0;
    rep.one_sided[0] = 0;  // centered via even extension
    start = 1;
  }
  for (std::size_t i = start; i < n; ++i) {
    const double w = 1.0 + d.d1[i] * d.d1[i];
    const double sq = std::sqrt(w);
    const double ka = d.d2[i] / (w * sq);
    const double kr = d.d1[i] / (p.r[i] * sq);
    rep.kappa_axial[i] = ka;
    rep.kappa_rotational[i] = kr;
    rep.H[i] = ka + (dim - 1) * kr;
    rep.A_norm_sq[i] = ka * ka + (dim - 1) * kr * kr;
  }
  return rep;
}

namespace {

enum class Trend { increasing, decreasing };

Trend strict_trend(const std::vector<double>& v, const char* what) {
  if (v.size() < 2) throw std::invalid_argument(what);
  const bool inc = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    const bool step_inc = v[i] > v[i - 1];
    if (step_inc != inc || v[i] == v[i - 1]) {
      throw std::invalid_argument(what);
    }
  }
  return inc ? Trend::increasing : Trend::decreasing;
}

}  // namespace

GraphProfile convert_gauge(const RadialProfile& p) {
  p.validate();
  const Trend trend =
      strict_trend(p.r, "convert_gauge: radial profile not monotone in z");
  GraphProfile g;
  g.dim = p.dim;
  g.t = p.t;
  g.stencil_order = p.stencil_order;
  g.has_axis = false;
  const std::size_t n = p.z.size();
  g.r.resize(n);
  g.f.resize(n);
  if (trend == Trend::increasing) {
    g.r = p.r;
    g.f = p.z;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      g.r[i] = p.r[n - 1 - i];
      g.f[i] = p.z[n - 1 - i];
    }
  }
  g.validate();
  return g;
}

RadialProfile convert_gauge(const GraphProfile& p) {
  p.validate();
  // the axis node (vertical tangent of the inverse) cannot live on a radius
  // graph; start from the first positive radius
  const std::size_t skip = p.has_axis ? 1 : 0;
  std::vector<double> f(p.f.begin() + skip, p.f.end());
  std::vector<double> r(p.r.begin() + skip, p.r.end());
  const Trend trend =
      strict_trend(f, "convert_gauge: graph profile not monotone in f");
  RadialProfile out;
  out.dim = p.dim;
  out.t = p.t;
  out.stencil_order = p.stencil_order;
  const std::size_t n = f.size();
  out.z.resize(n);
  out.r.resize(n);
  if (trend == Trend::increasing) {
    out.z = f;
    out.r = r;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.z[i] = f[n - 1 - i];
      out.r[i] = r[n - 1 - i];
    }
  }
  out.validate();
  return out;
}

ConvexityFlags convexity_flags(const RadialProfile& p) {
  p.validate();
  const auto d = derivatives(p.z, p.r, p.stencil_order);
  const int dim = p.dim;
  ConvexityFlags fl;
  fl.r_positive = true;
  fl.r_z_positive = true;
  fl.r_t_negative = true;
  fl.r_zz_negative = true;
  for (std::size_t i = 0; i < p.z.size(); ++i) {
    if (!(p.r[i] > 0.0)) fl.r_positive = false;
    if (!(d.d1[i] > 0.0)) fl.r_z_positive = false;
    if (!(d.d2[i] < 0.0)) fl.r_zz_negative = false;
    const double rt =
        d.d2[i] / (1.0 + d.d1[i] * d.d1[i]) - (dim - 1) / p.r[i];
    if (!(rt < 0.0)) fl.r_t_negative = false;
  }
  return fl;
}

}  // namespace mcflab
