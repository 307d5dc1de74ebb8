#include "mcflab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace mcflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Nodes and weights from the symmetric tridiagonal Jacobi matrix.
Quadrature golub_welsch(const std::vector<double>& diag,
                        const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag[i];
    J(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Quadrature q;
  q.x.resize(n);
  q.w.resize(n);
  for (int i = 0; i < n; ++i) {
    q.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    q.w[i] = mu0 * v0 * v0;
  }
  return q;
}

void symmetrize(Quadrature& q) {
  const std::size_t n = q.x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double xm = 0.5 * (q.x[j] - q.x[i]);
    q.x[i] = -xm;
    q.x[j] = xm;
    const double wm = 0.5 * (q.w[i] + q.w[j]);
    q.w[i] = wm;
    q.w[j] = wm;
  }
  if (n % 2 == 1) q.x[n / 2] = 0.0;
}

// Associated Legendre P_d^m(cos theta) with the Condon-Shortley phase, plus
// its colatitude derivative; assumes 0 < theta < pi.
void assoc_legendre(int d, int m, double theta, double* P, double* dP_dtheta) {
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= -(2.0 * k - 1.0) * s;
  if (d == m) {
    *P = pmm;
    *dP_dtheta = m * x * pmm / s;
    return;
  }
  double pm1 = pmm;                       // P_m^m
  double p = x * (2.0 * m + 1.0) * pmm;   // P_{m+1}^m
  for (int l = m + 2; l <= d; ++l) {
    const double p2 = (x * (2.0 * l - 1.0) * p - (l + m - 1.0) * pm1) / (l - m);
    pm1 = p;
    p = p2;
  }
  *P = p;
  *dP_dtheta = (d * x * p - (d + m) * pm1) / s;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Quadrature gauss_jacobi(int count, double alpha, double beta) {
  if (count < 1) throw std::invalid_argument("gauss_jacobi: count < 1");
  if (alpha <= -1.0 || beta <= -1.0) {
    throw std::invalid_argument("gauss_jacobi: exponents must exceed -1");
  }
  std::vector<double> a(count), b(count > 1 ? count - 1 : 0);
  const double apb = alpha + beta;
  a[0] = (beta - alpha) / (apb + 2.0);
  for (int k = 1; k < count; ++k) {
    const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
    a[k] = (beta * beta - alpha * alpha) / den;
  }
  for (int k = 1; k < count; ++k) {
    const double num =
        4.0 * k * (k + alpha) * (k + beta) * (k + apb);
    const double den = (2.0 * k + apb) * (2.0 * k + apb) *
                       (2.0 * k + apb + 1.0) * (2.0 * k + apb - 1.0);
    b[k - 1] = std::sqrt(num / den);
  }
  const double mu0 = std::pow(2.0, apb + 1.0) * std::tgamma(alpha + 1.0) *
                     std::tgamma(beta + 1.0) / std::tgamma(apb + 2.0);
  Quadrature q = golub_welsch(a, b, mu0);
  if (alpha == beta) symmetrize(q);
  return q;
}

Quadrature gauss_legendre(int count) { return gauss_jacobi(count, 0.0, 0.0); }

Quadrature gauss_hermite(int count) {
  if (count < 1) throw std::invalid_argument("gauss_hermite: count < 1");
  std::vector<double> a(count, 0.0), b(count > 1 ? count - 1 : 0);
  for (int k = 1; k < count; ++k) b[k - 1] = std::sqrt(0.5 * k);
  Quadrature q = golub_welsch(a, b, std::sqrt(kPi));
  symmetrize(q);
  return q;
}

double composite_integral(const std::vector<double>& x,
                          const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) {
    throw std::invalid_argument("composite_integral: need matching sizes >= 2");
  }
  const double h = (x.back() - x.front()) / static_cast<double>(n - 1);
  bool uniform = true;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::fabs(x[i + 1] - x[i] - h) > 1e-9 * std::max(1.0, std::fabs(h))) {
      uniform = false;
      break;
    }
  }
  if (!uniform) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    return s;
  }
  const std::size_t m = n - 1;
  auto boole = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; i += 4) {
      s += 7.0 * y[i] + 32.0 * y[i + 1] + 12.0 * y[i + 2] + 32.0 * y[i + 3] +
           7.0 * y[i + 4];
    }
    return s * 2.0 * h / 45.0;
  };
  auto simpson = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; i += 2) {
      s += y[i] + 4.0 * y[i + 1] + y[i + 2];
    }
    return s * h / 3.0;
  };
  if (m % 4 == 0) return boole(0, m);
  if (m % 2 == 0) return simpson(0, m);
  if (m >= 3) return simpson(0, m - 1) + 0.5 * h * (y[m - 1] + y[m]);
  return 0.5 * h * (y[0] + y[1]);
}

double unit_sphere_area(int m) {
  if (m < 0) throw std::invalid_argument("unit_sphere_area: negative index");
  return 2.0 * std::pow(kPi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

std::vector<SpherePoint> sphere_quadrature(Dimension dim, int order) {
  if (int(dim) != 3) {
    throw std::invalid_argument("sphere_quadrature: three dimensions only");
  }
  if (order < 1) throw std::invalid_argument("sphere_quadrature: order < 1");
  const Quadrature gl = gauss_legendre(order + 1);
  const int m_phi = 2 * order + 1;
  std::vector<SpherePoint> pts;
  pts.reserve(gl.x.size() * m_phi);
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double x = gl.x[i];
    const double theta = std::acos(x);
    const double s = std::sin(theta);
    for (int j = 0; j < m_phi; ++j) {
      const double phi = 2.0 * kPi * j / m_phi;
      SpherePoint pt;
      pt.p = {s * std::cos(phi), s * std::sin(phi), x};
      pt.theta = theta;
      pt.phi = phi;
      pt.weight = gl.w[i] * 2.0 * kPi / m_phi;
      pts.push_back(pt);
    }
  }
  return pts;
}

double hermite_half_arg(int l, double z) {
  if (l < 0) throw std::invalid_argument("hermite_half_arg: negative degree");
  const double x = 0.5 * z;
  double h0 = 1.0;
  if (l == 0) return h0;
  double h1 = 2.0 * x;
  for (int k = 1; k < l; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double hermite_half_arg_derivative(int l, double z) {
  // d/dz H_l(z/2) = l H_{l-1}(z/2)
  if (l == 0) return 0.0;
  return l * hermite_half_arg(l - 1, z);
}

double hermite_norm_sq(int l) {
  return 2.0 * std::sqrt(kPi) * std::pow(2.0, l) * factorial(l);
}

int harmonic_multiplicity(Dimension dim, int d) {
  if (d < 0) throw std::invalid_argument("harmonic_multiplicity: d < 0");
  const int n = dim;
  if (d == 0) return 1;
  // dim of degree-d harmonics on S^{n-1}
  const double v = (2.0 * d + n - 2.0) / (d + n - 2.0) *
                   std::tgamma(d + n - 2.0 + 1.0) /
                   (factorial(d) * std::tgamma(n - 1.0));
  return static_cast<int>(std::lround(v));
}

double harmonic_eigenvalue(Dimension dim, int d) {
  if (d < 0) throw std::invalid_argument("harmonic_eigenvalue: d < 0");
  return static_cast<double>(d) * (d + int(dim) - 2);
}

HarmonicSample sphere_harmonic(Dimension dim, int d, int m, double theta,
                               double phi) {
  if (int(dim) != 3) {
    throw std::invalid_argument("sphere_harmonic: three dimensions only");
  }
  if (d < 0 || std::abs(m) > d) {
    throw std::invalid_argument("sphere_harmonic: need |m| <= d");
  }
  const int ma = std::abs(m);
  double P, dP;
  assoc_legendre(d, ma, theta, &P, &dP);
  const double N = std::sqrt((2.0 * d + 1.0) / (4.0 * kPi) *
                             factorial(d - ma) / factorial(d + ma));
  HarmonicSample out;
  if (m == 0) {
    out.value = N * P;
    out.d_theta = N * dP;
    out.d_phi_over_sin = 0.0;
    return out;
  }
  const double s = std::sin(theta);
  const double c = std::sqrt(2.0) * N;
  if (m > 0) {
    out.value = c * P * std::cos(ma * phi);
    out.d_theta = c * dP * std::cos(ma * phi);
    out.d_phi_over_sin = -c * P * ma * std::sin(ma * phi) / s;
  } else {
    out.value = c * P * std::sin(ma * phi);
    out.d_theta = c * dP * std::sin(ma * phi);
    out.d_phi_over_sin = c * P * ma * std::cos(ma * phi) / s;
  }
  return out;
}

double eigenvalue(Dimension dim, int l, int d) {
  if (l < 0 || d < 0) throw std::invalid_argument("eigenvalue: negative index");
  const int n = dim;
  return 1.0 - 0.5 * l - harmonic_eigenvalue(dim, d) / (2.0 * (n - 1));
}

CylinderField::CylinderField(Dimension dim, int l_max, int d_max)
    : dim_(dim), lmax_(l_max), dmax_(d_max) {
  if (int(dim) != 3) {
    throw std::invalid_argument("CylinderField: three dimensions only");
  }
  if (l_max < 0 || d_max < 0) {
    throw std::invalid_argument("CylinderField: negative truncation");
  }
  offset_.resize(d_max + 2);
  offset_[0] = 0;
  for (int d = 0; d <= d_max; ++d) {
    offset_[d + 1] =
        offset_[d] + static_cast<std::size_t>(harmonic_multiplicity(dim, d)) *
                (l_max + 1);
  }
  c_.assign(offset_.back(), 0.0);
}

std::size_t CylinderField::index(int l, int d, int m) const {
  if (l < 0 || l > lmax_ || d < 0 || d > dmax_ || std::abs(m) > d) {
    throw std::out_of_range("CylinderField: index out of range");
  }
  return offset_[d] + static_cast<std::size_t>(m + d) * (lmax_ + 1) + l;
}

double& CylinderField::at(int l, int d, int m) { return c_[index(l, d, m)]; }
double CylinderField::at(int l, int d, int m) const {
  return c_[index(l, d, m)];
}

double CylinderField::norm_sq() const {
  double s = 0.0;
  for (int d = 0; d <= dmax_; ++d) {
    for (int m = -d; m <= d; ++m) {
      for (int l = 0; l <= lmax_; ++l) {
        const double c = at(l, d, m);
        s += c * c * hermite_norm_sq(l);
      }
    }
  }
  return s;
}

double CylinderField::value(double z, double theta, double phi) const {
  std::vector<double> h(lmax_ + 1);
  for (int l = 0; l <= lmax_; ++l) h[l] = hermite_half_arg(l, z);
  double s = 0.0;
  for (int d = 0; d <= dmax_; ++d) {
    for (int m = -d; m <= d; ++m) {
      const double Y = sphere_harmonic(dim_, d, m, theta, phi).value;
      for (int l = 0; l <= lmax_; ++l) s += at(l, d, m) * h[l] * Y;
    }
  }
  return s;
}

CylinderField apply_L(const CylinderField& u) {
  CylinderField out = u;
  for (int d = 0; d <= u.d_max(); ++d) {
    for (int m = -d; m <= d; ++m) {
      for (int l = 0; l <= u.l_max(); ++l) {
        out.at(l, d, m) = u.at(l, d, m) * eigenvalue(u.dim(), l, d);
      }
    }
  }
  return out;
}

SpectralSplit split(const CylinderField& u) {
  SpectralSplit sp{u, u, u};
  const double tol = 1e-12;
  for (int d = 0; d <= u.d_max(); ++d) {
    for (int m = -d; m <= d; ++m) {
      for (int l = 0; l <= u.l_max(); ++l) {
        const double lam = eigenvalue(u.dim(), l, d);
        sp.plus.at(l, d, m) = (lam > tol) ? u.at(l, d, m) : 0.0;
        sp.zero.at(l, d, m) = (std::fabs(lam) <= tol) ? u.at(l, d, m) : 0.0;
        sp.minus.at(l, d, m) = (lam < -tol) ? u.at(l, d, m) : 0.0;
      }
    }
  }
  return sp;
}

GaussianFunctionals gaussian_functionals(const CylinderField& u) {
  const int lmax = u.l_max();
  const int dmax = u.d_max();
  const int n = u.dim();
  const Quadrature gh = gauss_hermite(lmax + 12);
  const auto sphere = sphere_quadrature(u.dim(), dmax + 6);

  // basis tables on the sphere nodes
  const std::size_t nmodes_ang = [&] {
    std::size_t k = 0;
    for (int d = 0; d <= dmax; ++d) k += 2 * d + 1;
    return k;
  }();
  std::vector<double> Yv(sphere.size() * nmodes_ang);
  std::vector<double> Yt(sphere.size() * nmodes_ang);
  std::vector<double> Yp(sphere.size() * nmodes_ang);
  for (std::size_t q = 0; q < sphere.size(); ++q) {
    std::size_t k = 0;
    for (int d = 0; d <= dmax; ++d) {
      for (int m = -d; m <= d; ++m, ++k) {
        const auto hs =
            sphere_harmonic(u.dim(), d, m, sphere[q].theta, sphere[q].phi);
        Yv[q * nmodes_ang + k] = hs.value;
        Yt[q * nmodes_ang + k] = hs.d_theta;
        Yp[q * nmodes_ang + k] = hs.d_phi_over_sin;
      }
    }
  }

  GaussianFunctionals out{0.0, 0.0, 0.0};
  std::vector<double> h(lmax + 1), hp(lmax + 1);
  for (std::size_t iz = 0; iz < gh.x.size(); ++iz) {
    const double z = 2.0 * gh.x[iz];
    const double wz = 2.0 * gh.w[iz];
    for (int l = 0; l <= lmax; ++l) {
      h[l] = hermite_half_arg(l, z);
      hp[l] = hermite_half_arg_derivative(l, z);
    }
    for (std::size_t q = 0; q < sphere.size(); ++q) {
      double val = 0.0, val_z = 0.0, gt = 0.0, gp = 0.0;
      std::size_t k = 0;
      for (int d = 0; d <= dmax; ++d) {
        for (int m = -d; m <= d; ++m, ++k) {
          double a = 0.0, az = 0.0;
          for (int l = 0; l <= lmax; ++l) {
            const double c = u.at(l, d, m);
            a += c * h[l];
            az += c * hp[l];
          }
          val += a * Yv[q * nmodes_ang + k];
          val_z += az * Yv[q * nmodes_ang + k];
          gt += a * Yt[q * nmodes_ang + k];
          gp += a * Yp[q * nmodes_ang + k];
        }
      }
      const double wq = wz * sphere[q].weight;
      out.norm_sq += wq * val * val;
      out.dirichlet_sq +=
          wq * (val_z * val_z + (gt * gt + gp * gp) / (2.0 * (n - 1)));
    }
  }
  out.form = out.norm_sq - out.dirichlet_sq;
  return out;
}

double rayleigh_quotient(const CylinderField& u) {
  const GaussianFunctionals g = gaussian_functionals(u);
  if (g.norm_sq <= 0.0) {
    throw std::invalid_argument("rayleigh_quotient: zero field");
  }
  return g.form / g.norm_sq;
}

double cylinder_gaussian_area(Dimension dim) {
  const int n = dim;
  return unit_sphere_area(n - 1) * std::pow(2.0 * (n - 1), 0.5 * (n - 1)) *
         std::exp(-0.5 * (n - 1)) * 2.0 * std::sqrt(kPi);
}

std::vector<double> hermite_project(const std::vector<double>& z,
                                    const std::vector<double>& u, int l_max) {
  if (z.size() != u.size()) {
    throw std::invalid_argument("hermite_project: size mismatch");
  }
  std::vector<double> coeff(l_max + 1, 0.0);
  std::vector<double> integrand(z.size());
  for (int l = 0; l <= l_max; ++l) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      integrand[i] = u[i] * hermite_half_arg(l, z[i]) *
                     std::exp(-z[i] * z[i] / 4.0);
    }
    coeff[l] = composite_integral(z, integrand) / hermite_norm_sq(l);
  }
  return coeff;
}

double hermite_series_eval(const std::vector<double>& coeff, double z) {
  double s = 0.0;
  for (std::size_t l = 0; l < coeff.size(); ++l) {
    s += coeff[l] * hermite_half_arg(static_cast<int>(l), z);
  }
  return s;
}

double weighted_profile_norm_sq(const std::vector<double>& z,
                                const std::vector<double>& u) {
  if (z.size() != u.size()) {
    throw std::invalid_argument("weighted_profile_norm_sq: size mismatch");
  }
  std::vector<double> integrand(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    integrand[i] = u[i] * u[i] * std::exp(-z[i] * z[i] / 4.0);
  }
  return composite_integral(z, integrand);
}

std::array<double, 3> split_profile_norms(const std::vector<double>& z,
                                          const std::vector<double>& u,
                                          int l_max) {
  const auto coeff = hermite_project(z, u, l_max);
  const double total = weighted_profile_norm_sq(z, u);
  double plus = 0.0, zero = 0.0, captured = 0.0;
  for (int l = 0; l <= l_max; ++l) {
    const double e = coeff[l] * coeff[l] * hermite_norm_sq(l);
    captured += e;
    if (l <= 1) plus += e;
    if (l == 2) zero += e;
  }
  const double minus = std::max(0.0, total - captured) +
                       std::max(0.0, captured - plus - zero);
  return {std::sqrt(plus), std::sqrt(zero), std::sqrt(minus)};
}

MerleZaagResult merle_zaag_classify(
    const std::vector<double>& tau,
    const std::vector<std::array<double, 3>>& norms, double threshold,
    double trailing_fraction) {
  if (tau.size() != norms.size() || tau.empty()) {
    throw std::invalid_argument("merle_zaag_classify: bad series");
  }
  MerleZaagResult out;
  const double t_lo =
      tau.back() - trailing_fraction * (tau.back() - tau.front());
  const auto& fin = norms.back();
  int dom = 0;
  if (fin[1] > fin[dom]) dom = 1;
  if (fin[2] > fin[dom]) dom = 2;
  bool ok = true;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < t_lo) continue;
    double others = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (k != dom) others += norms[i][k];
    }
    const double ratio =
        (norms[i][dom] > 0.0) ? others / norms[i][dom] : 1e300;
    out.ratio.push_back(ratio);
    out.trailing_ratio = std::max(out.trailing_ratio, ratio);
    if (ratio > threshold) ok = false;
  }
  if (ok) {
    out.verdict = (dom == 0)   ? MzVerdict::plus_dominated
                  : (dom == 1) ? MzVerdict::zero_dominated
                               : MzVerdict::minus_dominated;
  }
  return out;
}

}  // namespace mcflab
