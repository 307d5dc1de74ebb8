#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mcflab {

using OdeRhs =
    std::function<void(double x, std::span<const double> y, std::span<double> dydx)>;

// Classical fixed-step RK4; records every accepted state.
struct FixedStepSolution {
  std::vector<double> x;
  std::vector<std::vector<double>> y;
};
FixedStepSolution rk4_integrate(const OdeRhs& rhs, std::span<const double> y0,
                                double x0, double x1, std::size_t steps);

struct AdaptiveOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 1e-4;
  double h_max = 1e100;
  std::size_t max_steps = 2000000;
};

// Terminal event: integration stops where value(x, y) crosses zero in the
// given direction (+1 rising, -1 falling, 0 either).
struct OdeEvent {
  std::function<double(double x, std::span<const double> y)> value;
  int direction = 0;
};

struct AdaptiveSolution {
  std::vector<double> x;
  std::vector<std::vector<double>> y;
  bool event_hit = false;
  bool step_failure = false;
  std::size_t steps_taken = 0;
};

// Dormand-Prince 5(4) with PI-free classic step control; event location by
// bisection on cubic Hermite interpolation over the bracketing step.
AdaptiveSolution dp5_integrate(const OdeRhs& rhs, std::span<const double> y0,
                               double x0, double x1, const AdaptiveOptions& opt,
                               const OdeEvent* event = nullptr);

}  // namespace mcflab
