#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mcflab/types.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss rules via the Golub-Welsch eigenvalue method.
Quadrature gauss_legendre(int count);                 // weight 1 on [-1, 1]
Quadrature gauss_hermite(int count);                  // weight e^{-x^2} on R
Quadrature gauss_jacobi(int count, double alpha, double beta);
                                                      // (1-x)^a (1+x)^b on [-1, 1]

// Integral of samples y over a uniform grid x: composite Boole when the
// interval count is a multiple of four, Simpson when it is even, and a
// Simpson + trailing-trapezoid fallback otherwise.  Non-uniform grids fall
// back to the trapezoid rule.
double composite_integral(const std::vector<double>& x,
                          const std::vector<double>& y);

// Area of the unit m-sphere S^m.
double unit_sphere_area(int m);

// Product quadrature on the unit sphere (three ambient dimensions only):
// Gauss nodes in the colatitude, uniform nodes in the azimuth.  Exact for
// spherical polynomials of degree <= 2*order.
struct SpherePoint {
  std::array<double, 3> p;  // unit vector
  double theta;             // colatitude, in (0, pi)
  double phi;               // azimuth
  double weight;
};
std::vector<SpherePoint> sphere_quadrature(Dimension dim, int order);

// ---------------------------------------------------------------------------
// Basis on the rescaled cylinder
// ---------------------------------------------------------------------------
//
// Axial factors h_l(z) = H_l(z/2) (Hermite polynomials in half argument),
// orthogonal under the weight e^{-z^2/4}; angular factors are real
// orthonormal spherical harmonics Y_{d,m}.  The drift Laplacian acting on
// h_l(z) Y_{d,m} plus the zeroth-order term of the linearized rescaled flow
// is diagonal with eigenvalue
//
//   lambda(l, d) = 1 - l/2 - d (d + n - 2) / (2 (n - 1)).

double hermite_half_arg(int l, double z);
double hermite_half_arg_derivative(int l, double z);
double hermite_norm_sq(int l);  // = 2 sqrt(pi) 2^l l!

int harmonic_multiplicity(Dimension dim, int d);
double harmonic_eigenvalue(Dimension dim, int d);  // = d (d + n - 2)

// Value and tangential-derivative components of the real orthonormal
// harmonic Y_{d,m} (three ambient dimensions, m in [-d, d]).  Valid away
// from the poles.
struct HarmonicSample {
  double value;
  double d_theta;           // colatitude derivative
  double d_phi_over_sin;    // azimuth derivative divided by sin(theta)
};
HarmonicSample sphere_harmonic(Dimension dim, int d, int m, double theta,
                               double phi);

double eigenvalue(Dimension dim, int l, int d);

// ---------------------------------------------------------------------------
// Cylinder fields
// ---------------------------------------------------------------------------

// A truncated expansion sum c_{l,d,m} h_l(z) Y_{d,m}(theta).  The container
// is fixed to three ambient dimensions because evaluation needs explicit
// harmonics; the eigenvalue bookkeeping above stays general.
class CylinderField {
 public:
  CylinderField(Dimension dim, int l_max, int d_max);

  Dimension dim() const { return dim_; }
  int l_max() const { return lmax_; }
  int d_max() const { return dmax_; }

  double& at(int l, int d, int m);
  double at(int l, int d, int m) const;

  // Weighted L^2 norm squared, from orthogonality.
  double norm_sq() const;

  double value(double z, double theta, double phi) const;

 private:
  std::size_t index(int l, int d, int m) const;

  Dimension dim_;
  int lmax_;
  int dmax_;
  std::vector<std::size_t> offset_;
  std::vector<double> c_;
};

// Apply the diagonal linearized operator.
CylinderField apply_L(const CylinderField& u);

struct SpectralSplit {
  CylinderField plus;   // eigenvalue > 0
  CylinderField zero;   // eigenvalue = 0
  CylinderField minus;  // eigenvalue < 0
};
SpectralSplit split(const CylinderField& u);

// Quadrature-evaluated Gaussian functionals; the quadratic form is computed
// from the Dirichlet integral, not from the eigenvalue table, so comparing
// rayleigh_quotient against eigenvalue() exercises two independent routes.
struct GaussianFunctionals {
  double norm_sq;       // int u^2 w
  double dirichlet_sq;  // int (u_z^2 + |grad_S u|^2 / (2(n-1))) w
  double form;          // <L u, u> = norm_sq - dirichlet_sq
};
GaussianFunctionals gaussian_functionals(const CylinderField& u);
double rayleigh_quotient(const CylinderField& u);

// Gaussian-weighted area of the exact rescaled cylinder, in closed form.
double cylinder_gaussian_area(Dimension dim);

// ---------------------------------------------------------------------------
// Axial profiles (rotationally symmetric data on a finite grid)
// ---------------------------------------------------------------------------

// Coefficients of u against h_0..h_{l_max} under the weight e^{-z^2/4},
// computed by composite quadrature on the given grid.
std::vector<double> hermite_project(const std::vector<double>& z,
                                    const std::vector<double>& u, int l_max);
double hermite_series_eval(const std::vector<double>& coeff, double z);

// int u^2 e^{-z^2/4} dz over the grid.
double weighted_profile_norm_sq(const std::vector<double>& z,
                                const std::vector<double>& u);

// Norms of the unstable / neutral / stable parts of a rotationally
// symmetric profile: modes l <= 1 are unstable, l = 2 is neutral, and the
// rest (including the truncation remainder) counts as stable.
std::array<double, 3> split_profile_norms(const std::vector<double>& z,
                                          const std::vector<double>& u,
                                          int l_max = 12);

// ---------------------------------------------------------------------------
// Dominance classification for norm triples along a trajectory
// ---------------------------------------------------------------------------

enum class MzVerdict { plus_dominated, zero_dominated, minus_dominated, undecided };

struct MerleZaagResult {
  MzVerdict verdict = MzVerdict::undecided;
  double trailing_ratio = 0.0;   // worst (others / dominant) over the window
  std::vector<double> ratio;     // per-sample ratio over the trailing window
};

// Examine the trailing fraction of the series: the component largest at the
// final time dominates when the sum of the other two stays below threshold
// times its own, at every trailing sample.  Feed squared norms to get the
// U-ratio convention.
MerleZaagResult merle_zaag_classify(
    const std::vector<double>& tau,
    const std::vector<std::array<double, 3>>& norms, double threshold = 0.1,
    double trailing_fraction = 0.3);

}  // namespace mcflab
