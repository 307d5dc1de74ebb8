#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mcflab {

// count equally spaced nodes from a to b inclusive (count >= 2).
std::vector<double> uniform_grid(double a, double b, std::size_t count);

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
// Returns w with w[k][j] = weight of nodes[j] for d^k/dx^k at x0, k = 0..m.
std::vector<std::vector<double>> fornberg_weights(double x0,
                                                 std::span<const double> nodes,
                                                 int m);

// First and second derivatives of samples y on nodes x, stencil accuracy
// `order` (2 or 4) in the interior; one-sided stencils of the same nominal
// order at the ends are flagged in one_sided.
struct DerivativeTable {
  std::vector<double> d1, d2;
  std::vector<std::uint8_t> one_sided;
};
DerivativeTable derivatives(std::span<const double> x,
                            std::span<const double> y, int order);

// Second derivative at x = 0 of an even function sampled on x[0] = 0 < x[1] <
// ... (mirror extension y(-x) = y(x)); `order` as above.
double even_second_derivative(std::span<const double> x,
                              std::span<const double> y, int order);

// Shape-preserving monotone cubic interpolant (Fritsch-Carlson slopes).
// Monotone data yields a monotone interpolant; no overshoot, which matters
// for every comparison-principle check downstream.
class Pchip {
 public:
  static Pchip fit(std::span<const double> x, std::span<const double> y);
  double operator()(double t) const;
  double derivative(double t) const;
  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, d_;
  std::size_t segment(double t) const;
};

}  // namespace mcflab
