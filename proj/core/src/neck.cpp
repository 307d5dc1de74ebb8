#include "mcflab/neck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "mcflab/grid.hpp"
#include "mcflab/rng.hpp"
#include "mcflab/spectral.hpp"

namespace mcflab {

namespace {

constexpr double kPi = std::numbers::pi;

double cylinder_scale(int n, double t) {
  return std::sqrt((n - 1) / (2.0 * (-t)));  // mean curvature of the cylinder
}

std::array<double, 3> cross(const std::array<double, 3>& a,
                            const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

std::array<std::array<double, 4>, 4> RotationFrame::matrix() const {
  // exp of the block-skew generator [[0, b], [-b^T, 0]]
  const std::array<double, 3>& b = tilt;
  const double beta =
      std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  double s_over, one_minus_c_over;  // sin(beta)/beta, (1-cos(beta))/beta^2
  if (beta < 1e-8) {
    s_over = 1.0 - beta * beta / 6.0;
    one_minus_c_over = 0.5 - beta * beta / 24.0;
  } else {
    s_over = std::sin(beta) / beta;
    one_minus_c_over = (1.0 - std::cos(beta)) / (beta * beta);
  }
  std::array<std::array<double, 4>, 4> B{};
  for (int k = 0; k < 3; ++k) {
    B[k][3] = b[k];
    B[3][k] = -b[k];
  }
  std::array<std::array<double, 4>, 4> B2{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += B[i][k] * B[k][j];
      B2[i][j] = s;
    }
  }
  std::array<std::array<double, 4>, 4> S{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      S[i][j] = (i == j ? 1.0 : 0.0) + s_over * B[i][j] +
                one_minus_c_over * B2[i][j];
    }
  }
  return S;
}

std::array<std::array<double, 4>, 3> rotation_fields(
    const RotationFrame& frame, const std::array<double, 4>& x) {
  const auto S = frame.matrix();
  std::array<double, 4> xq{x[0] - frame.offset[0], x[1] - frame.offset[1],
                           x[2] - frame.offset[2], x[3]};
  std::array<double, 4> y{};  // S^T (x - q)
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) y[i] += S[j][i] * xq[j];
  }
  std::array<std::array<double, 4>, 3> K{};
  for (int a = 0; a < 3; ++a) {
    std::array<double, 3> ea{};
    ea[a] = 1.0;
    const auto w3 = cross(ea, {y[0], y[1], y[2]});
    const std::array<double, 4> w{w3[0], w3[1], w3[2], 0.0};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) K[a][i] += S[i][j] * w[j];
    }
  }
  return K;
}

DivergenceCheck divergence_identity_check(const RotationFrame& frame,
                                          int samples, std::uint64_t seed) {
  Rng rng(seed);
  DivergenceCheck out;
  const double h = 1e-3;
  for (int s = 0; s < samples; ++s) {
    std::array<double, 4> x{}, y{};
    for (int i = 0; i < 4; ++i) {
      x[i] = rng.uniform(-3.0, 3.0);
      y[i] = rng.uniform(-3.0, 3.0);
    }
    for (int a = 0; a < 3; ++a) {
      double div = 0.0;
      for (int i = 0; i < 4; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        div += (rotation_fields(frame, xp)[a][i] -
                rotation_fields(frame, xm)[a][i]) /
               (2.0 * h);
      }
      out.max_divergence = std::max(out.max_divergence, std::fabs(div));
      const auto Kx = rotation_fields(frame, x)[a];
      const auto Ky = rotation_fields(frame, y)[a];
      double chord = 0.0, dist2 = 0.0;
      for (int i = 0; i < 4; ++i) {
        chord += (Kx[i] - Ky[i]) * (x[i] - y[i]);
        dist2 += (x[i] - y[i]) * (x[i] - y[i]);
      }
      out.max_chord_defect =
          std::max(out.max_chord_defect, std::fabs(chord) / dist2);
    }
  }
  return out;
}

void NeckPatch::validate() const {
  if (int(dim) != 3) {
    throw std::invalid_argument("NeckPatch: three dimensions only");
  }
  if (z.size() < 5 || time.empty()) {
    throw std::invalid_argument("NeckPatch: too few nodes or times");
  }
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    if (!(z[i + 1] > z[i])) {
      throw std::invalid_argument("NeckPatch: axial nodes must increase");
    }
  }
  for (std::size_t i = 0; i + 1 < time.size(); ++i) {
    if (!(time[i + 1] > time[i])) {
      throw std::invalid_argument("NeckPatch: times must increase");
    }
  }
  for (double t : time) {
    if (!(t < 0.0)) throw std::invalid_argument("NeckPatch: times must be < 0");
  }
  for (int k = 0; k < mode_count; ++k) {
    if (modes[k].size() != time.size()) {
      throw std::invalid_argument("NeckPatch: mode/time size mismatch");
    }
    for (const auto& row : modes[k]) {
      if (row.size() != z.size()) {
        throw std::invalid_argument("NeckPatch: mode/grid size mismatch");
      }
    }
  }
  for (const auto& row : modes[0]) {
    for (double v : row) {
      if (!(v > 0.0)) {
        throw std::invalid_argument("NeckPatch: symmetric radius must be > 0");
      }
    }
  }
}

void patch_mode_basis(int k, const std::array<double, 3>& th, double* value,
                      std::array<double, 3>* grad) {
  const double c1 = std::sqrt(3.0 / (4.0 * kPi));
  const double c4 = std::sqrt(5.0 / (16.0 * kPi));
  const double c5 = std::sqrt(15.0 / (4.0 * kPi));
  const double c7 = std::sqrt(15.0 / (16.0 * kPi));
  double v = 0.0;
  std::array<double, 3> amb{};  // gradient of the homogeneous extension
  int deg = 0;
  switch (k) {
    case 0:
      v = 1.0;
      break;
    case 1:
    case 2:
    case 3: {
      deg = 1;
      const int i = k - 1;
      v = c1 * th[i];
      amb[i] = c1;
      break;
    }
    case 4:
      deg = 2;
      v = c4 * (3.0 * th[2] * th[2] - 1.0);
      amb = {-2.0 * c4 * th[0], -2.0 * c4 * th[1], 4.0 * c4 * th[2]};
      break;
    case 5:
      deg = 2;
      v = c5 * th[0] * th[2];
      amb = {c5 * th[2], 0.0, c5 * th[0]};
      break;
    case 6:
      deg = 2;
      v = c5 * th[1] * th[2];
      amb = {0.0, c5 * th[2], c5 * th[1]};
      break;
    case 7:
      deg = 2;
      v = c7 * (th[0] * th[0] - th[1] * th[1]);
      amb = {2.0 * c7 * th[0], -2.0 * c7 * th[1], 0.0};
      break;
    case 8:
      deg = 2;
      v = c5 * th[0] * th[1];
      amb = {c5 * th[1], c5 * th[0], 0.0};
      break;
    default:
      throw std::invalid_argument("patch_mode_basis: bad mode index");
  }
  *value = v;
  if (grad != nullptr) {
    for (int i = 0; i < 3; ++i) (*grad)[i] = amb[i] - deg * v * th[i];
  }
}

double NeckPatch::radius(std::size_t it, std::size_t iz,
                         const std::array<double, 3>& theta) const {
  double r = 0.0;
  for (int k = 0; k < mode_count; ++k) {
    double v;
    patch_mode_basis(k, theta, &v, nullptr);
    r += modes[k].at(it).at(iz) * v;
  }
  return r;
}

namespace {

// <K_alpha, nu> H at one sample, from the assembled surface data.
std::array<double, 3> fields_dot_normal(const RotationFrame& frame, double r,
                                        const std::array<double, 3>& grad_r,
                                        double r_z, double z_pos,
                                        const std::array<double, 3>& th) {
  double g2 = 0.0;
  for (int i = 0; i < 3; ++i) g2 += grad_r[i] * grad_r[i];
  const double norm = std::sqrt(1.0 + g2 / (r * r) + r_z * r_z);
  std::array<double, 4> nu{};
  for (int i = 0; i < 3; ++i) nu[i] = (-th[i] + grad_r[i] / r) / norm;
  nu[3] = r_z / norm;
  const std::array<double, 4> X{r * th[0], r * th[1], r * th[2], z_pos};
  const auto K = rotation_fields(frame, X);
  std::array<double, 3> out{};
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 4; ++i) out[a] += K[a][i] * nu[i];
  }
  return out;
}

struct PatchSlopes {
  // d/dz of each mode amplitude: [k][it][iz]
  std::array<std::vector<std::vector<double>>, NeckPatch::mode_count> d1;
};

PatchSlopes patch_slopes(const NeckPatch& patch) {
  PatchSlopes s;
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    s.d1[k].resize(patch.time.size());
    for (std::size_t it = 0; it < patch.time.size(); ++it) {
      s.d1[k][it] = derivatives(patch.z, patch.modes[k][it], 2).d1;
    }
  }
  return s;
}

std::array<double, 3> sample_components(const NeckPatch& patch,
                                        const PatchSlopes& slopes,
                                        const RotationFrame& frame,
                                        std::size_t it, std::size_t iz,
                                        const std::array<double, 3>& th) {
  double r = 0.0, r_z = 0.0;
  std::array<double, 3> grad_r{};
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    double v;
    std::array<double, 3> g;
    patch_mode_basis(k, th, &v, &g);
    const double c = patch.modes[k][it][iz];
    r += c * v;
    r_z += slopes.d1[k][it][iz] * v;
    for (int i = 0; i < 3; ++i) grad_r[i] += c * g[i];
  }
  return fields_dot_normal(frame, r, grad_r, r_z, patch.z[iz], th);
}

}  // namespace

std::array<double, 3> normal_component(const NeckPatch& patch,
                                       const RotationFrame& frame,
                                       std::size_t it, std::size_t iz,
                                       const std::array<double, 3>& th) {
  double r = 0.0, r_z = 0.0;
  std::array<double, 3> grad_r{};
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    double v;
    std::array<double, 3> g;
    patch_mode_basis(k, th, &v, &g);
    const double c = patch.modes[k].at(it).at(iz);
    r += c * v;
    const auto dk = derivatives(patch.z, patch.modes[k][it], 2).d1;
    r_z += dk[iz] * v;
    for (int i = 0; i < 3; ++i) grad_r[i] += c * g[i];
  }
  return fields_dot_normal(frame, r, grad_r, r_z, patch.z[iz], th);
}

CertificationReport certify_symmetry(const NeckPatch& patch,
                                     const RotationFrame& frame,
                                     int sphere_order) {
  patch.validate();
  const auto slopes = patch_slopes(patch);
  const auto sphere = sphere_quadrature(patch.dim, sphere_order);
  CertificationReport rep;
  for (std::size_t it = 0; it < patch.time.size(); ++it) {
    const double H = cylinder_scale(patch.dim, patch.time[it]);
    for (std::size_t iz = 0; iz < patch.z.size(); ++iz) {
      for (const auto& pt : sphere) {
        const auto kn = sample_components(patch, slopes, frame, it, iz, pt.p);
        ++rep.samples;
        for (int a = 0; a < 3; ++a) {
          const double cert = std::fabs(kn[a]) * H;
          if (cert > rep.sup_certificate) {
            rep.sup_certificate = cert;
            rep.t_arg = patch.time[it];
            rep.z_arg = patch.z[iz];
          }
        }
      }
    }
  }
  return rep;
}

RotationFrame axis_correction(const NeckPatch& patch) {
  patch.validate();
  if (patch.z.front() > -1.0 || patch.z.back() < 1.0) {
    throw std::invalid_argument("axis_correction: grid must cover [-1, 1]");
  }
  const std::size_t it = patch.time.size() - 1;
  const int n = patch.dim;
  const double cn = unit_sphere_area(n - 1) / n;

  // mode amplitudes at the three reference slices
  std::array<std::array<double, NeckPatch::mode_count>, 3> amp{};  // z=-1,0,1
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    const Pchip p = Pchip::fit(patch.z, patch.modes[k][it]);
    amp[0][k] = p(-1.0);
    amp[1][k] = p(0.0);
    amp[2][k] = p(1.0);
  }
  auto radius_at = [&](int slice, const std::array<double, 3>& th) {
    double r = 0.0;
    for (int k = 0; k < NeckPatch::mode_count; ++k) {
      double v;
      patch_mode_basis(k, th, &v, nullptr);
      r += amp[slice][k] * v;
    }
    return r;
  };

  const auto sphere = sphere_quadrature(patch.dim, 8);
  std::array<double, 3> E{}, F{};
  for (const auto& pt : sphere) {
    const double r0 = radius_at(1, pt.p);
    const double dr = 0.5 * (radius_at(2, pt.p) - radius_at(0, pt.p));
    for (int i = 0; i < 3; ++i) {
      E[i] += pt.weight * r0 * pt.p[i];
      F[i] += pt.weight * dr * pt.p[i];
    }
  }
  RotationFrame frame;
  for (int i = 0; i < 3; ++i) {
    frame.offset[i] = E[i] / cn;
    frame.tilt[i] = F[i] / cn;
  }
  return frame;
}

RotationFrame refine_frame(const NeckPatch& patch, const RotationFrame& init,
                           int iters, int sphere_order) {
  patch.validate();
  const auto slopes = patch_slopes(patch);
  const auto sphere = sphere_quadrature(patch.dim, sphere_order);
  const std::size_t it_stride = std::max<std::size_t>(1, patch.time.size() / 12);
  const std::size_t iz_stride = std::max<std::size_t>(1, patch.z.size() / 16);

  auto residuals = [&](const RotationFrame& fr) {
    std::vector<double> res;
    for (std::size_t it = 0; it < patch.time.size(); it += it_stride) {
      const double H = cylinder_scale(patch.dim, patch.time[it]);
      for (std::size_t iz = 0; iz < patch.z.size(); iz += iz_stride) {
        for (const auto& pt : sphere) {
          const auto kn = sample_components(patch, slopes, fr, it, iz, pt.p);
          for (int a = 0; a < 3; ++a) res.push_back(kn[a] * H);
        }
      }
    }
    return res;
  };
  auto unpack = [](const Eigen::VectorXd& p) {
    RotationFrame fr;
    for (int i = 0; i < 3; ++i) {
      fr.offset[i] = p(i);
      fr.tilt[i] = p(3 + i);
    }
    return fr;
  };

  Eigen::VectorXd p(6);
  for (int i = 0; i < 3; ++i) {
    p(i) = init.offset[i];
    p(3 + i) = init.tilt[i];
  }
  std::vector<double> r0 = residuals(unpack(p));
  auto cost = [](const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += v * v;
    return c;
  };
  double c0 = cost(r0);
  const double fd_step = 1e-6;
  for (int iter = 0; iter < iters; ++iter) {
    const std::size_t m = r0.size();
    Eigen::MatrixXd J(m, 6);
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXd pj = p;
      pj(j) += fd_step;
      const std::vector<double> rj = residuals(unpack(pj));
      for (std::size_t i = 0; i < m; ++i) J(i, j) = (rj[i] - r0[i]) / fd_step;
    }
    Eigen::VectorXd r(m);
    for (std::size_t i = 0; i < m; ++i) r(i) = r0[i];
    Eigen::MatrixXd JtJ = J.transpose() * J;
    JtJ.diagonal().array() += 1e-14;
    Eigen::VectorXd step = JtJ.ldlt().solve(J.transpose() * r);
    bool improved = false;
    for (int back = 0; back < 6; ++back) {
      const Eigen::VectorXd pn = p - step;
      const std::vector<double> rn = residuals(unpack(pn));
      const double cn = cost(rn);
      if (cn < c0) {
        p = pn;
        r0 = rn;
        c0 = cn;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved || step.norm() < 1e-14) break;
  }
  return unpack(p);
}

double mode_hat_exponent(Dimension dim, int d) {
  const int n = dim;
  return (n - 1 - harmonic_eigenvalue(dim, d)) / (2.0 * (n - 1));
}

namespace {

int mode_degree(int k) { return (k == 0) ? 0 : (k <= 3 ? 1 : 2); }

// One Crank-Nicolson step of v_t = v_zz + c v on a uniform grid with
// prescribed end values at the new time.
void cn_step(std::vector<double>& v, double h, double dt, double c_mid,
             double left_new, double right_new, std::vector<double>& lo,
             std::vector<double>& di, std::vector<double>& up,
             std::vector<double>& rhs) {
  const std::size_t n = v.size();
  const double rr = dt / (2.0 * h * h);
  lo.assign(n, 0.0);
  di.assign(n, 0.0);
  up.assign(n, 0.0);
  rhs.assign(n, 0.0);
  di[0] = 1.0;
  rhs[0] = left_new;
  di[n - 1] = 1.0;
  rhs[n - 1] = right_new;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lo[i] = -rr;
    di[i] = 1.0 + 2.0 * rr - 0.5 * dt * c_mid;
    up[i] = -rr;
    rhs[i] = rr * v[i - 1] + (1.0 - 2.0 * rr + 0.5 * dt * c_mid) * v[i] +
             rr * v[i + 1];
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lo[i] / di[i - 1];
    di[i] -= m * up[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  v[n - 1] = rhs[n - 1] / di[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    v[i] = (rhs[i] - up[i] * v[i + 1]) / di[i];
  }
}

}  // namespace

LinearNeckSolution solve_linearized_neck(const NeckEvolutionConfig& cfg,
                                         const ModeProfile& init,
                                         const ModeBoundary& bc) {
  if (!(cfg.t1 > cfg.t0) || !(cfg.t1 < 0.0)) {
    throw std::invalid_argument("solve_linearized_neck: need t0 < t1 < 0");
  }
  const std::size_t nz =
      static_cast<std::size_t>(std::lround((cfg.z_hi - cfg.z_lo) / cfg.dz)) + 1;
  const std::vector<double> z = uniform_grid(cfg.z_lo, cfg.z_hi, nz);
  const double h = z[1] - z[0];
  const std::size_t nt = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround((cfg.t1 - cfg.t0) / cfg.dt)));
  const double dt = (cfg.t1 - cfg.t0) / static_cast<double>(nt);
  const int n = cfg.dim;

  LinearNeckSolution sol;
  sol.patch.dim = cfg.dim;
  sol.patch.z = z;

  // deviation amplitudes; mode 0 is the deviation from the exact cylinder
  std::array<std::vector<double>, NeckPatch::mode_count> v;
  std::array<std::vector<std::vector<double>>, NeckPatch::mode_count> rec;
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    v[k].resize(nz);
    for (std::size_t i = 0; i < nz; ++i) v[k][i] = init(k, z[i]);
  }

  auto record = [&](double t) {
    sol.patch.time.push_back(t);
    const double rc = std::sqrt(2.0 * (n - 1) * (-t));
    for (int k = 0; k < NeckPatch::mode_count; ++k) {
      rec[k].push_back(v[k]);
      if (k == 0) {
        for (double& x : rec[0].back()) x += rc;
      }
    }
  };
  if (cfg.t0 >= cfg.record_from) record(cfg.t0);

  std::vector<double> lo, di, up, rhs;
  double t = cfg.t0;
  for (std::size_t s = 0; s < nt; ++s) {
    const double t_new = cfg.t0 + (cfg.t1 - cfg.t0) *
                                      static_cast<double>(s + 1) /
                                      static_cast<double>(nt);
    const double t_mid = 0.5 * (t + t_new);
    for (int k = 0; k < NeckPatch::mode_count; ++k) {
      const double a = mode_hat_exponent(cfg.dim, mode_degree(k));
      const double c_mid = a / (-t_mid);
      cn_step(v[k], h, dt, c_mid, bc(k, t_new, 0), bc(k, t_new, 1), lo, di, up,
              rhs);
    }
    t = t_new;
    const bool due = (s + 1) % static_cast<std::size_t>(
                                   std::max(1, cfg.record_stride)) ==
                     0;
    if (t >= cfg.record_from && (due || s + 1 == nt)) record(t);
  }
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    sol.patch.modes[k] = std::move(rec[k]);
  }

  // residual of the transformed modes against an independent heat-equation
  // discretization: centered in time, fourth order in space
  const auto& times = sol.patch.time;
  double worst = 0.0;
  for (int k = 0; k < NeckPatch::mode_count; ++k) {
    const double a = mode_hat_exponent(cfg.dim, mode_degree(k));
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      const double dtr = times[j + 1] - times[j];
      std::vector<double> hat0(nz), hat1(nz);
      for (std::size_t i = 0; i < nz; ++i) {
        double w0 = sol.patch.modes[k][j][i];
        double w1 = sol.patch.modes[k][j + 1][i];
        if (k == 0) {
          w0 -= std::sqrt(2.0 * (n - 1) * (-times[j]));
          w1 -= std::sqrt(2.0 * (n - 1) * (-times[j + 1]));
        }
        hat0[i] = std::pow(-times[j], a) * w0;
        hat1[i] = std::pow(-times[j + 1], a) * w1;
      }
      double scale = 0.0;
      for (std::size_t i = 0; i < nz; ++i) {
        scale = std::max(scale, std::fabs(hat0[i]));
      }
      if (scale < 1e-300) continue;
      for (std::size_t i = 2; i + 2 < nz; ++i) {
        auto lap4 = [&](const std::vector<double>& y) {
          return (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] -
                  y[i + 2]) /
                 (12.0 * h * h);
        };
        const double res = (hat1[i] - hat0[i]) / dtr -
                           0.5 * (lap4(hat0) + lap4(hat1));
        worst = std::max(worst, std::fabs(res) / scale);
      }
    }
  }
  sol.max_heat_residual = worst;
  double dtr = dt * std::max(1, cfg.record_stride);
  sol.solver_tol = dtr * dtr + h * h * h * h;
  return sol;
}

std::vector<double> heat_kernel_convolve(const std::vector<double>& z,
                                         const std::vector<double>& v0,
                                         double elapsed,
                                         const std::vector<double>& z_eval) {
  if (z.size() != v0.size()) {
    throw std::invalid_argument("heat_kernel_convolve: size mismatch");
  }
  if (!(elapsed > 0.0)) {
    throw std::invalid_argument("heat_kernel_convolve: elapsed must be > 0");
  }
  const double norm = 1.0 / std::sqrt(4.0 * kPi * elapsed);
  std::vector<double> out(z_eval.size());
  std::vector<double> integrand(z.size());
  for (std::size_t e = 0; e < z_eval.size(); ++e) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = z_eval[e] - z[i];
      integrand[i] = norm * std::exp(-s * s / (4.0 * elapsed)) * v0[i];
    }
    out[e] = composite_integral(z, integrand);
  }
  return out;
}

NeckImprovementResult neck_improvement_experiment(
    const NeckImprovementConfig& cfg, std::uint64_t seed) {
  if (cfg.L < cfg.out_radius + 2.0) {
    throw std::invalid_argument(
        "neck_improvement_experiment: L too small for the output window");
  }
  const double S = cfg.L / 4.0;
  const double t0 = -cfg.L * cfg.L / 16.0;
  const double t1 = -1.0;
  const double win_z = cfg.out_radius / 4.0;
  const double win_t = -(cfg.out_radius * cfg.out_radius / 16.0 + 1.0);
  const std::size_t nz =
      static_cast<std::size_t>(std::lround(2.0 * S / cfg.dz)) + 1;
  const std::vector<double> z = uniform_grid(-S, S, nz);
  const double h = z[1] - z[0];
  const std::size_t nt = static_cast<std::size_t>(
      std::max(1.0, std::ceil((t1 - t0) / cfg.dt - 1e-12)));
  std::vector<std::size_t> win_idx;
  for (std::size_t i = 0; i < nz; ++i) {
    if (std::fabs(z[i]) <= win_z + 1e-12) win_idx.push_back(i);
  }

  NeckImprovementResult result;
  result.L = cfg.L;
  Rng root(seed);
  std::vector<double> lo, di, up, rhs;
  for (int s = 0; s < cfg.seeds; ++s) {
    Rng rng = root.fork(static_cast<std::uint64_t>(s));
    double eps_in = 0.0, eps_out = 0.0;
    for (int k = 1; k < NeckPatch::mode_count; ++k) {
      const int d = mode_degree(k);
      const double a = mode_hat_exponent(cfg.dim, d);
      const double x1 = rng.signed_uniform(0.7, 1.0);
      const double x2 = rng.signed_uniform(0.7, 1.0);
      const double x3 = rng.signed_uniform(0.7, 1.0);
      std::vector<double> v(nz);
      for (std::size_t i = 0; i < nz; ++i) {
        const double shape = 0.2 * x1 * std::exp(-z[i] * z[i] / 8.0) +
                             0.5 * x2 * std::cos(kPi * z[i] / (4.0 * S)) +
                             0.3 * x3 * std::sin(kPi * z[i] / (2.0 * S));
        v[i] = cfg.eps * std::sqrt(-t0) * shape;
      }
      const double e_left = v.front(), e_right = v.back();
      // window samples: (t, values on win_idx)
      std::vector<double> win_t_list;
      std::vector<std::vector<double>> win_v;
      auto track = [&](double t) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        eps_in = std::max(eps_in, m / std::sqrt(-t));
        if (t >= win_t - 1e-9) {
          win_t_list.push_back(t);
          std::vector<double> row(win_idx.size());
          for (std::size_t i = 0; i < win_idx.size(); ++i) {
            row[i] = v[win_idx[i]];
          }
          win_v.push_back(std::move(row));
        }
      };
      track(t0);
      double t = t0;
      for (std::size_t step = 0; step < nt; ++step) {
        const double t_new =
            t0 + (t1 - t0) * static_cast<double>(step + 1) /
                     static_cast<double>(nt);
        const double scl = std::sqrt((-t_new) / (-t0));
        cn_step(v, h, t_new - t, a / (-0.5 * (t + t_new)), e_left * scl,
                e_right * scl, lo, di, up, rhs);
        t = t_new;
        track(t);
      }
      // degree-one channels: remove the best affine-in-z content (the part
      // a frame change absorbs), weighted by the certificate scale
      double A = 0.0, B = 0.0;
      if (d == 1) {
        double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1 = 0;
        for (std::size_t jt = 0; jt < win_t_list.size(); ++jt) {
          const double w = 1.0 / (-win_t_list[jt]);  // weight = H^2
          for (std::size_t ji = 0; ji < win_idx.size(); ++ji) {
            const double x = z[win_idx[ji]];
            const double y = win_v[jt][ji];
            s00 += w;
            s01 += w * x;
            s11 += w * x * x;
            b0 += w * y;
            b1 += w * x * y;
          }
        }
        const double det = s00 * s11 - s01 * s01;
        A = (s11 * b0 - s01 * b1) / det;
        B = (s00 * b1 - s01 * b0) / det;
      }
      for (std::size_t jt = 0; jt < win_t_list.size(); ++jt) {
        const double H = 1.0 / std::sqrt(-win_t_list[jt]);
        for (std::size_t ji = 0; ji < win_idx.size(); ++ji) {
          const double corrected =
              win_v[jt][ji] - (d == 1 ? A + B * z[win_idx[ji]] : 0.0);
          eps_out = std::max(eps_out, std::fabs(corrected) * H);
        }
      }
    }
    result.ratio.push_back(eps_out / eps_in);
  }
  result.max_ratio =
      *std::max_element(result.ratio.begin(), result.ratio.end());
  std::vector<double> sorted = result.ratio;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  result.median_ratio = (m % 2 == 1)
                            ? sorted[m / 2]
                            : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return result;
}

NeckSweepResult neck_improvement_sweep(const NeckImprovementConfig& base,
                                       const std::vector<double>& L_values,
                                       int seeds_per_length,
                                       std::uint64_t seed) {
  NeckSweepResult out;
  Rng root(seed);
  for (double L : L_values) {
    NeckImprovementConfig cfg = base;
    cfg.L = L;
    cfg.seeds = seeds_per_length;
    const auto res = neck_improvement_experiment(cfg, root.raw());
    out.L.push_back(L);
    out.median_ratio.push_back(res.median_ratio);
  }
  // least-squares slope of log(median) against log(L)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(out.L.size());
  for (std::size_t i = 0; i < out.L.size(); ++i) {
    const double x = std::log(out.L[i]);
    const double y = std::log(out.median_ratio[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

}  // namespace mcflab
