#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "mcflab/exact.hpp"
#include "mcflab/grid.hpp"

using namespace mcflab;

TEST_CASE("cylinder and sphere radius laws") {
  const Dimension n3(3);
  CHECK(cylinder_radius(n3, -1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cylinder_radius(n3, -0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cylinder_radius(Dimension(5), -2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(cylinder_radius(n3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cylinder_radius(n3, 1.0), std::invalid_argument);

  CHECK(sphere_radius(n3, 2.0, -1.0) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(sphere_radius(n3, 2.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  // forward in time the sphere shrinks and eventually vanishes
  CHECK(sphere_radius(n3, 1.0, 0.1) == doctest::Approx(std::sqrt(0.4)).epsilon(1e-14));
  CHECK_THROWS_AS(sphere_radius(n3, 1.0, 1.0 / 6.0), std::invalid_argument);
}

static const BowlSoliton& bowl3() {
  static const BowlSoliton b = solve_bowl(Dimension(3), 1.0, 120.0);
  return b;
}

TEST_CASE("bowl table passes its own independent residual check") {
  const auto& b = bowl3();
  CHECK(b.max_ode_residual <= 1e-8);
  CHECK(b.profile.r.front() == 0.0);
  CHECK(b.profile.f.front() == 0.0);
  CHECK(b.height(0.0) == 0.0);
  CHECK(b.slope(0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bowl height satisfies the profile equation between table nodes") {
  // sample on our own grid (incommensurate with the solver's nodes) and
  // check f_rr/(1+f_r^2) + (n-1) f_r / r = c by finite differences
  const auto& b = bowl3();
  const auto r = uniform_grid(0.5, 80.0, 1273);
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = b.height(r[i]);
  const auto d = derivatives(r, f, 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (d.one_sided[i]) continue;
    const double lhs =
        d.d2[i] / (1.0 + d.d1[i] * d.d1[i]) + 2.0 * d.d1[i] / r[i];
    worst = std::max(worst, std::fabs(lhs - 1.0));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("bowl tip curvature measured from the interpolant") {
  const auto& b = bowl3();
  const auto r = uniform_grid(0.0, 0.02, 5);
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = b.height(r[i]);
  CHECK(even_second_derivative(r, f, 4) ==
        doctest::Approx(1.0 / 3.0).epsilon(3e-6));
  // two-term series region near the axis: f = r^2/6 + r^4/540
  auto series = [](double r) {
    return r * r / 6.0 + std::pow(r, 4) / 540.0;
  };
  CHECK(b.height(0.005) == doctest::Approx(series(0.005)).epsilon(1e-13));
  CHECK(b.height(0.05) == doctest::Approx(series(0.05)).epsilon(1e-10));
}

TEST_CASE("bowl slope is the derivative of the height") {
  const auto& b = bowl3();
  for (double r : {1.0, 7.0, 31.4}) {
    const double h = 1e-5;
    const double fd = (b.height(r + h) - b.height(r - h)) / (2 * h);
    CHECK(b.slope(r) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("bowl far-field slope ratio approaches c/(n-1)") {
  const auto& b = bowl3();
  // f_r / r -> 1/2 with the known -1/(c r^2) correction
  const double ratio100 = b.slope(100.0) / 100.0;
  CHECK(std::fabs(ratio100 - 0.5) <= 1.2e-4);
  CHECK(ratio100 == doctest::Approx(b.slope_ratio_model(100.0)).epsilon(1e-6));
  CHECK(std::fabs(b.slope_ratio_at_rmax - 0.5) <= 1e-4);
  // r / f_r (the radial-gauge invariant r r_z along the translate) -> n - 1
  // from above, with the 4/r^2 correction implied by the slope-ratio model
  for (double r : {10.0, 20.0, 100.0}) {
    const double v = r / b.slope(r);
    CHECK(v > 2.0);
    CHECK(std::fabs(v - 2.0) <= 5.0 / (r * r));
  }
  const double v20 = 20.0 / b.slope(20.0);
  CHECK(v20 == doctest::Approx(2.0100502512562812).epsilon(1e-4));
}

TEST_CASE("bowl regression pins on the solved table") {
  const auto& b = bowl3();
  CHECK(b.height(5.0) == doctest::Approx(5.0924170630311689).epsilon(1e-9));
  CHECK(b.height(10.0) == doctest::Approx(23.109833506770418).epsilon(1e-9));
  CHECK(b.slope(10.0) == doctest::Approx(4.8978132870150874).epsilon(1e-9));
}

TEST_CASE("solve_bowl rejects bad parameters") {
  CHECK_THROWS_AS(solve_bowl(Dimension(3), -1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_bowl(Dimension(3), 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("shrinker family contains the exact sphere") {
  const int n = 3;
  const double a = std::sqrt(2.0 * n);
  const auto s = solve_shrinker(Dimension(n), a);
  // u(y) = sqrt(2n - y^2)
  CHECK(s.u_at_origin == doctest::Approx(a).epsilon(1e-8));
  CHECK(std::fabs(s.slope_at_origin) <= 1e-6);
  for (double y : {0.3, 0.9, 1.6, 2.2}) {
    CHECK(s.radius(y) == doctest::Approx(std::sqrt(2.0 * n - y * y)).epsilon(1e-7));
  }
  CHECK(s.concave);
  CHECK(s.max_ode_residual <= 1e-7);
}

static const ShrinkerProfile& shrinker10() {
  static const ShrinkerProfile s = solve_shrinker(Dimension(3), 10.0);
  return s;
}

TEST_CASE("shrinker neck bounds tighten with a") {
  const auto& s10 = shrinker10();
  const auto s20 = solve_shrinker(Dimension(3), 20.0);
  const double neck = 2.0;  // sqrt(2 (n-1))
  CHECK(s10.u_at_origin > neck);
  CHECK(s20.u_at_origin > neck);
  CHECK(s20.u_at_origin - neck < s10.u_at_origin - neck);
  CHECK(s10.u_at_origin < std::sqrt(6.0));
  CHECK(std::fabs(s10.slope_at_origin) <= 2e-3);
  CHECK(std::fabs(s20.slope_at_origin) <= 2e-4);
  CHECK(s10.concave);
  CHECK(s20.concave);
  CHECK(s10.max_ode_residual <= 1e-8);
  CHECK(s20.max_ode_residual <= 1e-8);
  // regression pins
  CHECK(s10.u_at_origin == doctest::Approx(2.0179046010206330).epsilon(1e-9));
  CHECK(s10.radius(2.0) == doctest::Approx(1.9837636536146745).epsilon(1e-9));
  CHECK(s20.radius(2.0) == doctest::Approx(1.9953086581491344).epsilon(1e-9));
}

TEST_CASE("shrinker radius near the tip follows the cap model") {
  const auto& s = shrinker10();
  const double k = s.a / 6.0;  // a/(2n)
  for (double dy : {1e-6, 1e-5, 1e-4}) {
    const double u = s.radius(s.a - dy);
    CHECK(u == doctest::Approx(std::sqrt(2.0 * dy / k)).epsilon(1e-2));
  }
  CHECK(s.radius(s.a) == 0.0);
  CHECK_THROWS_AS(s.radius(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(s.radius(s.a + 0.1), std::invalid_argument);
}

TEST_CASE("solve_shrinker guards the family range") {
  CHECK_THROWS_AS(solve_shrinker(Dimension(3), 1.5), std::invalid_argument);
  CHECK_NOTHROW(solve_shrinker(Dimension(3), 2.5));
}

TEST_CASE("barrier surface placement and consistency") {
  const auto& s = shrinker10();
  const double K = 10.0;
  const double t = -4.0;
  const auto p = shrinker_barrier_at(s, K, t, 801);
  CHECK_NOTHROW(p.validate());
  // the neck (widest) end sits at z = K a^2; the cap tip trails behind it
  const double z_neck = K * s.a * s.a;
  CHECK(p.z.back() <= z_neck);
  CHECK(p.z.front() >= z_neck - s.a * std::sqrt(-t) - 1e-9);
  const double root = std::sqrt(-t);
  for (std::size_t i = 0; i < p.z.size(); i += 100) {
    const double y = (z_neck - p.z[i]) / root;
    CHECK(p.r[i] == doctest::Approx(root * s.radius(y)).epsilon(1e-12));
  }
  // radii shrink toward the tip end, which is the low-z front
  CHECK(p.r.front() < p.r.back());
  CHECK_THROWS_AS(shrinker_barrier_at(s, K, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(shrinker_barrier_at(s, K, -1.0, 3), std::invalid_argument);
}
