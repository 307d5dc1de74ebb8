#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "mcflab/grid.hpp"
#include "mcflab/spectral.hpp"

using namespace mcflab;

namespace {
constexpr double kPi = std::numbers::pi;
const double kSqrtPi = std::sqrt(kPi);
}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1") {
  const auto q = gauss_legendre(5);
  REQUIRE(q.x.size() == 5);
  double s0 = 0, s8 = 0, s9 = 0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    s0 += q.w[i];
    s8 += q.w[i] * std::pow(q.x[i], 8);
    s9 += q.w[i] * std::pow(q.x[i], 9);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s8 == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
  CHECK(s9 == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("Gauss-Hermite moments of the e^{-x^2} weight") {
  const auto q = gauss_hermite(8);
  double m0 = 0, m2 = 0, m6 = 0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    m0 += q.w[i];
    m2 += q.w[i] * q.x[i] * q.x[i];
    m6 += q.w[i] * std::pow(q.x[i], 6);
  }
  CHECK(m0 == doctest::Approx(kSqrtPi).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(0.5 * kSqrtPi).epsilon(1e-13));
  CHECK(m6 == doctest::Approx(15.0 / 8.0 * kSqrtPi).epsilon(1e-12));
  CHECK_THROWS_AS(gauss_hermite(0), std::invalid_argument);
}

TEST_CASE("Gauss-Jacobi covers the (1-x)^a (1+x)^b weights") {
  const auto q = gauss_jacobi(6, 1.0, 1.0);
  double m0 = 0, m2 = 0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    m0 += q.w[i];
    m2 += q.w[i] * q.x[i] * q.x[i];
  }
  CHECK(m0 == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(4.0 / 15.0).epsilon(1e-13));
  // alpha = beta = 0 reduces to Legendre
  const auto j0 = gauss_jacobi(4, 0.0, 0.0);
  const auto l0 = gauss_legendre(4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(j0.x[i] == doctest::Approx(l0.x[i]).epsilon(1e-12));
    CHECK(j0.w[i] == doctest::Approx(l0.w[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gauss_jacobi(3, -1.5, 0.0), std::invalid_argument);
}

TEST_CASE("composite_integral picks the right rule for the node count") {
  auto quartic = [](double x) { return std::pow(x, 4); };
  // 8 intervals: Boole, exact on degree 5
  {
    const auto x = uniform_grid(0.0, 1.0, 9);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = quartic(x[i]);
    CHECK(composite_integral(x, y) == doctest::Approx(0.2).epsilon(1e-14));
  }
  // 6 intervals: Simpson, exact on cubics
  {
    const auto x = uniform_grid(0.0, 2.0, 7);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(x[i], 3);
    CHECK(composite_integral(x, y) == doctest::Approx(4.0).epsilon(1e-14));
  }
  // non-uniform: trapezoid, exact on linear data
  {
    const std::vector<double> x{0.0, 0.3, 1.0, 1.1, 2.0};
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] - 1.0;
    CHECK(composite_integral(x, y) == doctest::Approx(4.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(composite_integral({0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("unit sphere areas") {
  CHECK(unit_sphere_area(1) == doctest::Approx(2 * kPi).epsilon(1e-14));
  CHECK(unit_sphere_area(2) == doctest::Approx(4 * kPi).epsilon(1e-14));
  CHECK(unit_sphere_area(3) == doctest::Approx(2 * kPi * kPi).epsilon(1e-14));
  CHECK_THROWS_AS(unit_sphere_area(-1), std::invalid_argument);
}

TEST_CASE("sphere quadrature is exact on low-degree polynomials") {
  const auto pts = sphere_quadrature(Dimension(3), 6);
  double s0 = 0, sxx = 0, sxy = 0, sz4 = 0;
  for (const auto& p : pts) {
    s0 += p.weight;
    sxx += p.weight * p.p[0] * p.p[0];
    sxy += p.weight * p.p[0] * p.p[1];
    sz4 += p.weight * std::pow(p.p[2], 4);
  }
  CHECK(s0 == doctest::Approx(4 * kPi).epsilon(1e-13));
  CHECK(sxx == doctest::Approx(4 * kPi / 3.0).epsilon(1e-13));
  CHECK(sxy == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(sz4 == doctest::Approx(4 * kPi / 5.0).epsilon(1e-13));
  CHECK_THROWS_AS(sphere_quadrature(Dimension(4), 4), std::invalid_argument);
  CHECK_THROWS_AS(sphere_quadrature(Dimension(3), 0), std::invalid_argument);
}

TEST_CASE("half-argument Hermite polynomials and their derivatives") {
  for (double z : {-1.7, 0.0, 0.4, 2.3}) {
    CHECK(hermite_half_arg(0, z) == 1.0);
    CHECK(hermite_half_arg(1, z) == doctest::Approx(z).epsilon(1e-14));
    CHECK(hermite_half_arg(2, z) == doctest::Approx(z * z - 2.0).epsilon(1e-13));
    CHECK(hermite_half_arg(3, z) ==
          doctest::Approx(z * z * z - 6.0 * z).epsilon(1e-13));
    for (int l = 1; l <= 6; ++l) {
      CHECK(hermite_half_arg_derivative(l, z) ==
            doctest::Approx(l * hermite_half_arg(l - 1, z)).epsilon(1e-12));
    }
    CHECK(hermite_half_arg_derivative(0, z) == 0.0);
  }
  CHECK_THROWS_AS(hermite_half_arg(-1, 0.0), std::invalid_argument);
}

TEST_CASE("Hermite norms match quadrature") {
  CHECK(hermite_norm_sq(0) == doctest::Approx(2 * kSqrtPi).epsilon(1e-14));
  CHECK(hermite_norm_sq(3) == doctest::Approx(96 * kSqrtPi).epsilon(1e-13));
  // int h_l h_m e^{-z^2/4} dz = 2 int H_l(x) H_m(x) e^{-x^2} dx
  const auto q = gauss_hermite(24);
  for (int l = 0; l <= 5; ++l) {
    for (int m = 0; m <= 5; ++m) {
      double s = 0;
      for (std::size_t i = 0; i < q.x.size(); ++i) {
        const double z = 2.0 * q.x[i];
        s += 2.0 * q.w[i] * hermite_half_arg(l, z) * hermite_half_arg(m, z);
      }
      const double expect = (l == m) ? hermite_norm_sq(l) : 0.0;
      CHECK(s == doctest::Approx(expect).epsilon(1e-11).scale(hermite_norm_sq(l)));
    }
  }
}

TEST_CASE("harmonic multiplicities and Laplace eigenvalues") {
  CHECK(harmonic_multiplicity(Dimension(3), 0) == 1);
  CHECK(harmonic_multiplicity(Dimension(3), 1) == 3);
  CHECK(harmonic_multiplicity(Dimension(3), 2) == 5);
  CHECK(harmonic_multiplicity(Dimension(3), 7) == 15);
  CHECK(harmonic_multiplicity(Dimension(4), 1) == 4);
  CHECK(harmonic_multiplicity(Dimension(4), 2) == 9);
  CHECK(harmonic_eigenvalue(Dimension(3), 2) == doctest::Approx(6.0));
  CHECK(harmonic_eigenvalue(Dimension(4), 1) == doctest::Approx(3.0));
}

TEST_CASE("spherical harmonics are orthonormal with consistent gradients") {
  const auto pts = sphere_quadrature(Dimension(3), 10);
  for (int d = 0; d <= 2; ++d) {
    for (int m = -d; m <= d; ++m) {
      for (int d2 = 0; d2 <= 2; ++d2) {
        for (int m2 = -d2; m2 <= d2; ++m2) {
          double s = 0;
          for (const auto& p : pts) {
            s += p.weight * sphere_harmonic(Dimension(3), d, m, p.theta, p.phi).value *
                 sphere_harmonic(Dimension(3), d2, m2, p.theta, p.phi).value;
          }
          const double expect = (d == d2 && m == m2) ? 1.0 : 0.0;
          CHECK(s == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
        }
      }
    }
  }
  // Y_00 is the constant mode
  CHECK(sphere_harmonic(Dimension(3), 0, 0, 1.0, 2.0).value ==
        doctest::Approx(1.0 / std::sqrt(4 * kPi)).epsilon(1e-14));
  // tangential derivatives against finite differences
  const double h = 1e-6;
  for (int m : {-2, 0, 1}) {
    const double th = 1.1, ph = 0.7;
    const auto c = sphere_harmonic(Dimension(3), 2, m, th, ph);
    const auto tp = sphere_harmonic(Dimension(3), 2, m, th + h, ph);
    const auto tm = sphere_harmonic(Dimension(3), 2, m, th - h, ph);
    const auto pp = sphere_harmonic(Dimension(3), 2, m, th, ph + h);
    const auto pm = sphere_harmonic(Dimension(3), 2, m, th, ph - h);
    CHECK(c.d_theta == doctest::Approx((tp.value - tm.value) / (2 * h)).epsilon(1e-6));
    CHECK(c.d_phi_over_sin ==
          doctest::Approx((pp.value - pm.value) / (2 * h) / std::sin(th))
              .epsilon(1e-6).scale(1.0));
  }
  CHECK_THROWS_AS(sphere_harmonic(Dimension(3), 1, 2, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("mode eigenvalues and the sign sets in three dimensions") {
  const Dimension n3(3);
  CHECK(eigenvalue(n3, 0, 0) == doctest::Approx(1.0));
  CHECK(eigenvalue(n3, 1, 0) == doctest::Approx(0.5));
  CHECK(eigenvalue(n3, 0, 1) == doctest::Approx(0.5));
  CHECK(eigenvalue(n3, 2, 0) == doctest::Approx(0.0));
  CHECK(eigenvalue(n3, 1, 1) == doctest::Approx(0.0));
  CHECK(eigenvalue(n3, 0, 2) == doctest::Approx(-0.5));
  CHECK(eigenvalue(n3, 3, 0) == doctest::Approx(-0.5));
  CHECK(eigenvalue(n3, 2, 1) == doctest::Approx(-0.5));
  // general-dimension formula: 1 - l/2 - d(d+n-2)/(2(n-1))
  CHECK(eigenvalue(Dimension(5), 1, 1) == doctest::Approx(0.5 - 4.0 / 8.0));
}

namespace {

CylinderField single_mode(int l, int d, int m, double c) {
  CylinderField u(Dimension(3), 6, 3);
  u.at(l, d, m) = c;
  return u;
}

}  // namespace

TEST_CASE("cylinder field norms agree between orthogonality and quadrature") {
  CylinderField u(Dimension(3), 4, 2);
  u.at(0, 0, 0) = 0.7;
  u.at(2, 1, -1) = -0.4;
  u.at(1, 2, 2) = 0.25;
  u.at(4, 0, 0) = 0.05;
  const auto g = gaussian_functionals(u);
  CHECK(g.norm_sq == doctest::Approx(u.norm_sq()).epsilon(1e-11));
  CHECK(g.form == doctest::Approx(g.norm_sq - g.dirichlet_sq).epsilon(1e-13));
  CHECK_THROWS_AS(u.at(5, 0, 0), std::out_of_range);
  CHECK_THROWS_AS(u.at(0, 3, 4), std::out_of_range);
}

TEST_CASE("apply_L is diagonal on the mode basis") {
  CylinderField u(Dimension(3), 5, 2);
  u.at(1, 0, 0) = 2.0;
  u.at(2, 2, 1) = -1.5;
  u.at(4, 1, -1) = 0.3;
  const auto Lu = apply_L(u);
  CHECK(Lu.at(1, 0, 0) == doctest::Approx(eigenvalue(Dimension(3), 1, 0) * 2.0));
  CHECK(Lu.at(2, 2, 1) == doctest::Approx(eigenvalue(Dimension(3), 2, 2) * -1.5));
  CHECK(Lu.at(4, 1, -1) == doctest::Approx(eigenvalue(Dimension(3), 4, 1) * 0.3));
  CHECK(Lu.at(0, 0, 0) == 0.0);
}

TEST_CASE("spectral split sorts modes by eigenvalue sign and loses nothing") {
  CylinderField u(Dimension(3), 4, 3);
  int idx = 0;
  for (int l = 0; l <= 4; ++l)
    for (int d = 0; d <= 3; ++d)
      for (int m = -d; m <= d; ++m) u.at(l, d, m) = 0.1 * (++idx % 7) + 0.05;
  const auto s = split(u);
  for (int l = 0; l <= 4; ++l) {
    for (int d = 0; d <= 3; ++d) {
      const double lam = eigenvalue(Dimension(3), l, d);
      for (int m = -d; m <= d; ++m) {
        const double c = u.at(l, d, m);
        CHECK(s.plus.at(l, d, m) == (lam > 0 ? c : 0.0));
        CHECK(s.zero.at(l, d, m) == (lam == 0 ? c : 0.0));
        CHECK(s.minus.at(l, d, m) == (lam < 0 ? c : 0.0));
        CHECK(s.plus.at(l, d, m) + s.zero.at(l, d, m) + s.minus.at(l, d, m) ==
              doctest::Approx(c));
      }
    }
  }
  CHECK(s.plus.norm_sq() + s.zero.norm_sq() + s.minus.norm_sq() ==
        doctest::Approx(u.norm_sq()).epsilon(1e-13));
}

TEST_CASE("Rayleigh quotient of a pure mode reproduces its eigenvalue") {
  // quadrature route (Dirichlet integral) against the closed-form table
  for (auto [l, d, m] : std::vector<std::array<int, 3>>{
           {0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 1, 1}, {0, 2, -2}, {3, 1, 0}}) {
    const auto u = single_mode(l, d, m, 0.8);
    CHECK(rayleigh_quotient(u) ==
          doctest::Approx(eigenvalue(Dimension(3), l, d)).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(rayleigh_quotient(CylinderField(Dimension(3), 2, 1)),
                  std::invalid_argument);
}

TEST_CASE("Gaussian area of the rescaled cylinder in closed form") {
  CHECK(cylinder_gaussian_area(Dimension(3)) ==
        doctest::Approx(32.0 * std::pow(kPi, 1.5) / std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("axial Hermite projection round trips") {
  const auto z = uniform_grid(-12.0, 12.0, 2401);
  std::vector<double> u(z.size());
  const std::vector<double> truth{2.0, -0.7, 0.0, 0.3};
  for (std::size_t i = 0; i < z.size(); ++i)
    u[i] = hermite_series_eval(truth, z[i]);
  const auto c = hermite_project(z, u, 6);
  REQUIRE(c.size() == 7);
  for (std::size_t l = 0; l < c.size(); ++l) {
    const double expect = l < truth.size() ? truth[l] : 0.0;
    CHECK(c[l] == doctest::Approx(expect).epsilon(1e-8).scale(1.0));
  }
  // Parseval on the same grid
  double nsq = 0;
  for (std::size_t l = 0; l < truth.size(); ++l)
    nsq += truth[l] * truth[l] * hermite_norm_sq(static_cast<int>(l));
  CHECK(weighted_profile_norm_sq(z, u) == doctest::Approx(nsq).epsilon(1e-9));
}

TEST_CASE("profile norms split into unstable, neutral, and stable parts") {
  const auto z = uniform_grid(-12.0, 12.0, 2401);
  auto project_pure = [&](int l) {
    std::vector<double> u(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      u[i] = hermite_half_arg(l, z[i]);
    return split_profile_norms(z, u);
  };
  // cross-slot leakage is quadrature error amplified by the norms of the
  // high modes, so it sits well above the raw coefficient error
  const auto s1 = project_pure(1);  // unstable
  CHECK(s1[0] > 1e-3);
  CHECK(s1[1] <= 1e-6 * s1[0]);
  CHECK(s1[2] <= 1e-6 * s1[0]);
  const auto s2 = project_pure(2);  // neutral
  CHECK(s2[1] > 1e-3);
  CHECK(s2[0] <= 1e-6 * s2[1]);
  CHECK(s2[2] <= 1e-6 * s2[1]);
  const auto s4 = project_pure(4);  // stable
  CHECK(s4[2] > 1e-3);
  CHECK(s4[0] <= 1e-6 * s4[2]);
  CHECK(s4[1] <= 1e-6 * s4[2]);
}

TEST_CASE("dominance classification over the trailing window") {
  std::vector<double> tau;
  std::vector<std::array<double, 3>> norms;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    tau.push_back(t);
    norms.push_back({1e-6 * std::exp(-2 * t), 1e-4 * std::exp(-t),
                     std::exp(-0.05 * t)});
  }
  const auto res = merle_zaag_classify(tau, norms);
  CHECK(res.verdict == MzVerdict::minus_dominated);
  CHECK(res.trailing_ratio <= 0.1);
  CHECK_FALSE(res.ratio.empty());

  // three comparable components stay undecided
  std::vector<std::array<double, 3>> flat(tau.size(), {1.0, 1.0, 1.0});
  CHECK(merle_zaag_classify(tau, flat).verdict == MzVerdict::undecided);

  // growing unstable part
  std::vector<std::array<double, 3>> up;
  for (double t : tau) up.push_back({std::exp(t), 1e-5, 1e-6 * std::exp(-t)});
  CHECK(merle_zaag_classify(tau, up).verdict == MzVerdict::plus_dominated);

  const std::vector<std::array<double, 3>> one{{1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(merle_zaag_classify({0.0, 1.0}, one), std::invalid_argument);
  CHECK_THROWS_AS(merle_zaag_classify({}, {}), std::invalid_argument);
}
