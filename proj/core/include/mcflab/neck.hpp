#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mcflab/types.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Rotation vector fields
// ---------------------------------------------------------------------------
//
// The tube sits in four ambient dimensions: coordinates (x1, x2, x3) carry
// the cross-sectional sphere and x4 is the axis.  A frame consists of a
// center offset q in the cross-sectional coordinates and three tilt angles
// rotating the axis toward e1, e2, e3.  The associated normalized rotation
// fields are K_alpha(x) = S J_alpha S^T (x - q) where J_alpha are the
// standard so(3) generators acting on the first three coordinates,
// orthonormal under <A, B> = tr(A^T B) / 2.

struct RotationFrame {
  std::array<double, 3> offset{0.0, 0.0, 0.0};
  std::array<double, 3> tilt{0.0, 0.0, 0.0};

  // 4x4 rotation matrix exp(sum_k tilt_k G_k), G_k mixing coordinate k
  // with the axis.
  std::array<std::array<double, 4>, 4> matrix() const;
};

// The three rotation fields evaluated at an ambient point.
std::array<std::array<double, 4>, 3> rotation_fields(
    const RotationFrame& frame, const std::array<double, 4>& x);

// Sanity diagnostics: rotation fields are divergence free (checked by
// central differences) and skew along chords, <K(x) - K(y), x - y> = 0.
struct DivergenceCheck {
  double max_divergence = 0.0;
  double max_chord_defect = 0.0;
};
DivergenceCheck divergence_identity_check(const RotationFrame& frame,
                                          int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Neck patches
// ---------------------------------------------------------------------------
//
// A patch stores a tube r(theta, z, t) over a time window as angular-mode
// amplitudes: mode 0 is the full rotationally symmetric radius and modes
// 1..8 are coefficients of the real orthonormal spherical harmonics of
// degree one (three) and two (five) in the cross-sectional coordinates.

struct NeckPatch {
  static constexpr int mode_count = 9;

  Dimension dim{3};
  std::vector<double> z;
  std::vector<double> time;
  // modes[k][it][iz]
  std::array<std::vector<std::vector<double>>, mode_count> modes;

  void validate() const;
  double radius(std::size_t it, std::size_t iz,
                const std::array<double, 3>& theta) const;
};

// Value and tangential gradient of the angular basis function of mode k at
// a unit vector theta (mode 0 is the constant 1).
void patch_mode_basis(int k, const std::array<double, 3>& theta, double* value,
                      std::array<double, 3>* grad);

// <K_alpha, nu> for the three rotation fields at one surface sample, using
// the inward normal of the mode-expanded tube.
std::array<double, 3> normal_component(const NeckPatch& patch,
                                       const RotationFrame& frame,
                                       std::size_t it, std::size_t iz,
                                       const std::array<double, 3>& theta);

// ---------------------------------------------------------------------------
// Symmetry certification
// ---------------------------------------------------------------------------
//
// The certificate at a sample is max_alpha |<K_alpha, nu>| * H(t) with the
// exact-cylinder scale H(t) = 1 / sqrt(-t); a patch is eps-symmetric on its
// window when the sup over samples stays below eps.

struct CertificationReport {
  double sup_certificate = 0.0;
  double t_arg = 0.0;
  double z_arg = 0.0;
  std::size_t samples = 0;
};
CertificationReport certify_symmetry(const NeckPatch& patch,
                                     const RotationFrame& frame,
                                     int sphere_order = 8);

// First-order frame fit from slice integrals: offsets from the degree-one
// moments of the final-time slice at z = 0, tilts from the difference of
// the slices at z = +1 and z = -1.
RotationFrame axis_correction(const NeckPatch& patch);

// Gauss-Newton refinement of the frame against the squared certificate on
// a decimated sample set.
RotationFrame refine_frame(const NeckPatch& patch, const RotationFrame& init,
                           int iters = 12, int sphere_order = 6);

// ---------------------------------------------------------------------------
// Linearized evolution over the shrinking cylinder
// ---------------------------------------------------------------------------
//
// Around r(t) = sqrt(2 (n-1) (-t)) the angular mode of harmonic degree d
// obeys  v_t = v_zz + (n - 1 - d(d+n-2)) / (2 (n-1) (-t)) v;  the
// substitution vhat = (-t)^a v with a = (n-1-d(d+n-2)) / (2(n-1)) turns it
// into the plain heat equation.

double mode_hat_exponent(Dimension dim, int d);

struct NeckEvolutionConfig {
  Dimension dim{3};
  double z_lo = -8.0;
  double z_hi = 8.0;
  double t0 = -64.0;
  double t1 = -1.0;
  double dz = 0.05;
  double dt = 0.005;
  double record_from = -1e300;  // keep only times >= this
  int record_stride = 1;
};

using ModeProfile = std::function<double(int k, double z)>;
// side: 0 = left end, 1 = right end
using ModeBoundary = std::function<double(int k, double t, int side)>;

struct LinearNeckSolution {
  NeckPatch patch;  // mode 0 already includes the exact cylinder radius
  // worst relative residual of vhat against an independent heat-equation
  // discretization of the recorded window
  double max_heat_residual = 0.0;
  double solver_tol = 0.0;  // nominal truncation scale of that measurement
};
LinearNeckSolution solve_linearized_neck(const NeckEvolutionConfig& cfg,
                                         const ModeProfile& init,
                                         const ModeBoundary& bc);

// Free-space heat evolution of compactly supported grid data by kernel
// quadrature; the oracle for the transformed mode law.
std::vector<double> heat_kernel_convolve(const std::vector<double>& z,
                                         const std::vector<double>& v0,
                                         double elapsed,
                                         const std::vector<double>& z_eval);

// ---------------------------------------------------------------------------
// Improvement experiment
// ---------------------------------------------------------------------------
//
// Seeded linear-mode runs on the slab |z| <= L/4 over t in [-L^2/16, -1]
// with data held at the admissible envelope |v| <= eps sqrt(-t).  The
// output window is the neighborhood |z| <= R/4, t in [-R^2/16 - 1, -1]
// with R = out_radius.  Degree-one channels are corrected by their best
// affine-in-z removal (the frame content) before measuring the output
// certificate level; the ratio is eps_out / eps_in.

struct NeckImprovementConfig {
  Dimension dim{3};
  double L = 32.0;
  double eps = 1e-3;
  int seeds = 20;
  double dz = 0.05;
  double dt = 0.005;
  double out_radius = 10.0;
};

struct NeckImprovementResult {
  double L = 0.0;
  std::vector<double> ratio;  // per seed
  double max_ratio = 0.0;
  double median_ratio = 0.0;
};
NeckImprovementResult neck_improvement_experiment(
    const NeckImprovementConfig& cfg, std::uint64_t seed);

struct NeckSweepResult {
  std::vector<double> L;
  std::vector<double> median_ratio;
  double slope = 0.0;  // least-squares slope of log ratio vs log L
};
NeckSweepResult neck_improvement_sweep(const NeckImprovementConfig& base,
                                       const std::vector<double>& L_values,
                                       int seeds_per_length,
                                       std::uint64_t seed);

}  // namespace mcflab
