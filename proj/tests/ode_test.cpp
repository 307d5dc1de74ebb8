#include <cmath>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "mcflab/ode.hpp"
#include "mcflab/rng.hpp"

using namespace mcflab;

TEST_CASE("rk4 integrates the exponential at fourth order") {
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[0];
  };
  const std::vector<double> y0{1.0};
  auto err = [&](std::size_t steps) {
    const auto sol = rk4_integrate(rhs, y0, 0.0, 1.0, steps);
    return std::fabs(sol.y.back()[0] - std::exp(1.0));
  };
  CHECK(err(100) <= 1e-8);
  const double order = std::log2(err(50) / err(100));
  CHECK(std::fabs(order - 4.0) <= 0.2);
}

TEST_CASE("dp5 tracks the harmonic oscillator to tolerance") {
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const std::vector<double> y0{1.0, 0.0};
  AdaptiveOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const double end = 2.0 * std::acos(-1.0);
  const auto sol = dp5_integrate(rhs, y0, 0.0, end, opt);
  CHECK_FALSE(sol.step_failure);
  CHECK(sol.steps_taken > 10);
  CHECK(sol.x.back() == doctest::Approx(end).epsilon(1e-14));
  CHECK(sol.y.back()[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.y.back()[1] == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
}

TEST_CASE("dp5 honors the step-size cap") {
  auto rhs = [](double, std::span<const double>, std::span<double> dy) {
    dy[0] = 1.0;
  };
  AdaptiveOptions opt;
  opt.h_init = 0.01;
  opt.h_max = 0.01;
  const double y0[] = {0.0};
  const auto sol = dp5_integrate(rhs, y0, 0.0, 1.0, opt);
  CHECK(sol.x.size() >= 100);
  for (std::size_t i = 1; i < sol.x.size(); ++i) {
    CHECK(sol.x[i] - sol.x[i - 1] <= 0.01 + 1e-12);
  }
}

TEST_CASE("dp5 locates terminal events") {
  // y grows linearly; stop where y crosses zero from below
  auto rhs = [](double, std::span<const double>, std::span<double> dy) {
    dy[0] = 2.0;
  };
  OdeEvent ev;
  ev.value = [](double, std::span<const double> y) { return y[0]; };
  ev.direction = +1;
  AdaptiveOptions opt;
  const double y0[] = {-1.0};
  const auto sol = dp5_integrate(rhs, y0, 0.0, 5.0, opt, &ev);
  CHECK(sol.event_hit);
  CHECK(sol.x.back() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::fabs(sol.y.back()[0]) <= 1e-9);
}

TEST_CASE("seeded random streams are reproducible") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());
  Rng c(12346);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs = differs || (a.raw() != c.raw());
  CHECK(differs);
}

TEST_CASE("uniform draws respect their ranges") {
  Rng r(2026);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = r.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
    const double s = r.signed_uniform(0.5, 1.5);
    CHECK(std::fabs(s) >= 0.5);
    CHECK(std::fabs(s) < 1.5);
  }
}

TEST_CASE("forked streams are labeled and independent") {
  Rng parent(7);
  Rng f1 = parent.fork(1);
  Rng f2 = parent.fork(2);
  Rng f1_again = Rng(7).fork(1);
  // same label reproduces; different labels separate
  bool same = true, cross = false;
  for (int i = 0; i < 20; ++i) {
    const auto a = f1.raw();
    same = same && (a == f1_again.raw());
    cross = cross || (a != f2.raw());
  }
  CHECK(same);
  CHECK(cross);
}
