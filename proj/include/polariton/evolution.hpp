#ifndef POLARITON_EVOLUTION_HPP
#define POLARITON_EVOLUTION_HPP

#include <Eigen/Dense>
#include <functional>

#include "polariton/dispersion.hpp"
#include "polariton/greens.hpp"
#include "polariton/propagators.hpp"

namespace polariton {

// ---- bath discretization ---------------------------------------------------

struct BathDiscretization {
  std::vector<double> omega;
  std::vector<double> weight;
  std::vector<double> g;  // sqrt(w_i 2 sigma(omega_i)/pi)
  double omega_cut = 0.0;

  int size() const { return static_cast<int>(omega.size()); }
};

// Composite Gauss-Legendre panels over [0, omega_cut], split at the resonance
// cores [omega_n - 8 gamma_n, omega_n + 8 gamma_n] so the Lorentzian lines are
// resolved. Default omega_cut = max omega_n + 40 max gamma_n; the neglected
// high-frequency tail of the conductivity leaves a kernel error of order
// (2/pi) sum f_n gamma_n / omega_cut^2, so pass a larger cutoff when the
// kernel needs to be faithful beyond that.
inline BathDiscretization discretize_bath(const Medium& medium,
                                          int n_lines = 400,
                                          double omega_cut = 0.0) {
  BathDiscretization b;
  if (medium.resonances().empty()) return b;
  if (n_lines < 8) throw validation_error("bath needs at least 8 lines");
  b.omega_cut = omega_cut > 0.0
                    ? omega_cut
                    : medium.max_omega() + 40.0 * medium.max_gamma();
  if (b.omega_cut <= medium.max_omega())
    throw validation_error("omega_cut must exceed the highest resonance");
  std::vector<double> cuts = {0.0, b.omega_cut};
  for (const auto& r : medium.resonances()) {
    const double lo = r.omega - 8.0 * r.gamma, hi = r.omega + 8.0 * r.gamma;
    if (lo > 0.0 && lo < b.omega_cut) cuts.push_back(lo);
    if (hi > 0.0 && hi < b.omega_cut) cuts.push_back(hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const int n_panels = static_cast<int>(cuts.size()) - 1;
  std::vector<double> xs, ws;
  for (int p = 0; p < n_panels; ++p) {
    int n = n_lines / n_panels + (p < n_lines % n_panels ? 1 : 0);
    n = std::max(n, 4);
    detail::gauss_legendre(n, xs, ws);
    const double a = cuts[p], c = cuts[p + 1];
    for (int i = 0; i < n; ++i) {
      const double w = 0.5 * (c - a) * ws[i];
      const double x = 0.5 * (a + c) + 0.5 * (c - a) * xs[i];
      b.omega.push_back(x);
      b.weight.push_back(w);
      b.g.push_back(std::sqrt(w * 2.0 * sigma_of_omega(medium, x) / pi));
    }
  }
  return b;
}

// sup-norm error of the reconstructed kernel sum g^2 sin(w tau)/w vs chi(tau),
// relative to max |chi|, over tau in [0, T]
inline double bath_kernel_error(const BathDiscretization& bath,
                                const Medium& medium, double T,
                                int n_samples = 400) {
  double worst = 0.0, scale = 0.0;
  for (int s = 1; s <= n_samples; ++s) {
    const double tau = T * s / n_samples;
    double k = 0.0;
    for (int i = 0; i < bath.size(); ++i)
      k += bath.g[i] * bath.g[i] * std::sin(bath.omega[i] * tau) /
           bath.omega[i];
    const double chi = chi_time(medium, tau);
    worst = std::max(worst, std::abs(k - chi));
    scale = std::max(scale, std::abs(chi));
  }
  return worst / std::max(scale, 1e-300);
}

// ---- the coupled field + bath oscillator system ----------------------------

// Quadratic Hamiltonian H = |qdot|^2/2 + |Xdot|^2/2 + V with
//   V = |d|^2/2 - d.S ptil + |ptil|^2/2 + sum w^2 X^2 / 2,
// d = Lambda q the displacement amplitudes, ptil_c = sum_i g_ci X_ci the cell
// polarization amplitudes, and e_c = (S^T d)_c - ptil_c the electric field at
// cell c. Reduces to the modal Huttner-Barnett equations: qddot = -Lambda e,
// Xddot = -w^2 X + g e.
struct OscSystem {
  Eigen::VectorXd Lambda;                // field mode frequencies (n_f)
  Eigen::MatrixXd S;                     // n_f x n_c cell overlaps
  std::vector<BathDiscretization> bath;  // one per cell
  double truncation_loss = 0.0;  // worst 1 - sum_a S_ac^2 over cells

  int n_field() const { return static_cast<int>(Lambda.size()); }
  int n_cells() const { return static_cast<int>(bath.size()); }
  int bath_offset(int c) const {
    int o = 0;
    for (int i = 0; i < c; ++i) o += bath[i].size();
    return o;
  }
  int n_bath_total() const { return bath_offset(n_cells()); }
  int dim() const { return n_field() + n_bath_total(); }  // position count
};

struct StateVector {
  Eigen::VectorXd pos;  // [q, X]
  Eigen::VectorXd vel;  // [qdot, Xdot]
};

inline StateVector zero_state(const OscSystem& sys) {
  return {Eigen::VectorXd::Zero(sys.dim()), Eigen::VectorXd::Zero(sys.dim())};
}

// cell polarization amplitudes ptil_c = sum_i g_ci X_ci
inline Eigen::VectorXd cell_polarization(const OscSystem& sys,
                                         const Eigen::VectorXd& pos) {
  Eigen::VectorXd pt(sys.n_cells());
  int off = sys.n_field();
  for (int c = 0; c < sys.n_cells(); ++c) {
    double s = 0.0;
    for (int i = 0; i < sys.bath[c].size(); ++i)
      s += sys.bath[c].g[i] * pos[off + i];
    pt[c] = s;
    off += sys.bath[c].size();
  }
  return pt;
}

inline Eigen::VectorXd acceleration(const OscSystem& sys,
                                    const Eigen::VectorXd& pos) {
  const int nf = sys.n_field();
  const Eigen::VectorXd q = pos.head(nf);
  const Eigen::VectorXd pt = cell_polarization(sys, pos);
  const Eigen::VectorXd d = sys.Lambda.cwiseProduct(q);
  const Eigen::VectorXd e = sys.S.transpose() * d - pt;
  Eigen::VectorXd acc(sys.dim());
  acc.head(nf) = -sys.Lambda.cwiseProduct(sys.Lambda.cwiseProduct(q)) +
                 sys.Lambda.cwiseProduct(sys.S * pt);
  int off = nf;
  for (int c = 0; c < sys.n_cells(); ++c) {
    const auto& b = sys.bath[c];
    for (int i = 0; i < b.size(); ++i)
      acc[off + i] = -b.omega[i] * b.omega[i] * pos[off + i] + b.g[i] * e[c];
    off += b.size();
  }
  return acc;
}

inline double max_frequency(const OscSystem& sys) {
  double w = sys.n_field() > 0 ? sys.Lambda.maxCoeff() : 0.0;
  for (const auto& b : sys.bath)
    for (double x : b.omega) w = std::max(w, x);
  return w;
}

// ---- energy ----------------------------------------------------------------

struct EnergyReport {
  double total;
  double electromagnetic;  // (|qdot|^2 + |d|^2 - 2 d.S ptil + |ptil|^2)/2
  double material;         // sum (Xdot^2 + w^2 X^2)/2
  double h_m0;             // bath energy of the reference state (free motion)
  double h_rem;            // electromagnetic energy of the reference state
};

namespace detail {

inline double em_energy(const OscSystem& sys, const StateVector& z) {
  const int nf = sys.n_field();
  const Eigen::VectorXd d = sys.Lambda.cwiseProduct(z.pos.head(nf));
  const Eigen::VectorXd pt = cell_polarization(sys, z.pos);
  return 0.5 * (z.vel.head(nf).squaredNorm() + d.squaredNorm() -
                2.0 * d.dot(sys.S * pt) + pt.squaredNorm());
}

inline double material_energy(const OscSystem& sys, const StateVector& z) {
  double m = 0.0;
  int off = sys.n_field();
  for (const auto& b : sys.bath) {
    for (int i = 0; i < b.size(); ++i)
      m += 0.5 * (z.vel[off + i] * z.vel[off + i] +
                  b.omega[i] * b.omega[i] * z.pos[off + i] * z.pos[off + i]);
    off += b.size();
  }
  return m;
}

}  // namespace detail

inline double total_energy(const OscSystem& sys, const StateVector& z) {
  return detail::em_energy(sys, z) + detail::material_energy(sys, z);
}

// Ledger: total(t) = H_rem + H_M^(0), with H_rem the electromagnetic energy
// of the reference (initial) state and H_M^(0) its bath energy.
inline EnergyReport energy_report(const OscSystem& sys, const StateVector& z,
                                  const StateVector& z0) {
  EnergyReport r;
  r.electromagnetic = detail::em_energy(sys, z);
  r.material = detail::material_energy(sys, z);
  r.total = r.electromagnetic + r.material;
  r.h_rem = detail::em_energy(sys, z0);
  r.h_m0 = detail::material_energy(sys, z0);
  return r;
}

// ---- symplectic integrators -------------------------------------------------

// Yoshida triple-jump composition weights for orders 2, 4, 6, 8.
inline std::vector<double> yoshida_weights(int order) {
  if (order % 2 != 0 || order < 2 || order > 8)
    throw validation_error("integrator order must be 2, 4, 6, or 8");
  std::vector<double> w = {1.0};
  for (int k = 2; k < order; k += 2) {
    const double x1 = 1.0 / (2.0 - std::pow(2.0, 1.0 / (k + 1)));
    const double x0 = 1.0 - 2.0 * x1;
    std::vector<double> next;
    next.reserve(3 * w.size());
    for (double v : w) next.push_back(x1 * v);
    for (double v : w) next.push_back(x0 * v);
    for (double v : w) next.push_back(x1 * v);
    w = std::move(next);
  }
  return w;
}

namespace detail {

inline void leapfrog(const OscSystem& sys, StateVector& z, double h) {
  z.vel += 0.5 * h * acceleration(sys, z.pos);
  z.pos += h * z.vel;
  z.vel += 0.5 * h * acceleration(sys, z.pos);
}

}  // namespace detail

// one composed step; truncated = zero the field rows afterwards (the
// Langevin-only surrogate that discards the photonic sector)
inline void step(const OscSystem& sys, StateVector& z, double dt,
                 const std::vector<double>& weights, bool truncated = false) {
  for (double w : weights) detail::leapfrog(sys, z, w * dt);
  if (truncated) {
    z.pos.head(sys.n_field()).setZero();
    z.vel.head(sys.n_field()).setZero();
  }
}

struct Trajectory {
  double dt = 0.0;  // sample spacing
  std::vector<double> t;
  std::vector<StateVector> states;
};

struct stability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Trajectory integrate(const OscSystem& sys, const StateVector& z0,
                            double T, double dt, int order = 6,
                            int stride = 1, double drift_bound = 1e-4) {
  const double wmax = max_frequency(sys);
  if (wmax > 0.0 && !(dt < 0.1 / wmax))
    throw validation_error("time step too large: need dt < 0.1/omega_max");
  const auto weights = yoshida_weights(order);
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  Trajectory tr;
  tr.dt = dt * stride;
  StateVector z = z0;
  const double e0 = total_energy(sys, z0);
  tr.t.push_back(0.0);
  tr.states.push_back(z);
  for (std::size_t i = 1; i <= n; ++i) {
    step(sys, z, dt, weights);
    if (i % static_cast<std::size_t>(stride) == 0) {
      tr.t.push_back(i * dt);
      tr.states.push_back(z);
    }
    if (i % 1024 == 0 && e0 > 0.0 &&
        std::abs(total_energy(sys, z) - e0) > drift_bound * e0)
      throw stability_error("energy drift exceeded the configured bound");
  }
  return tr;
}

// ---- symplectic form check ---------------------------------------------------

// Evolves the fundamental matrix over T (binary powering of the one-step map)
// and returns max|M^T J M - J|.
inline double symplectic_form_check(const OscSystem& sys, double T, double dt,
                                    int order = 6, bool truncated = false) {
  const int n = sys.dim();
  const auto weights = yoshida_weights(order);
  Eigen::MatrixXd M(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    StateVector z = zero_state(sys);
    if (j < n)
      z.pos[j] = 1.0;
    else
      z.vel[j - n] = 1.0;
    step(sys, z, dt, weights, truncated);
    M.col(j).head(n) = z.pos;
    M.col(j).tail(n) = z.vel;
  }
  auto nsteps = static_cast<unsigned long long>(std::llround(T / dt));
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  while (nsteps > 0) {
    if (nsteps & 1ull) P = M * P;
    nsteps >>= 1;
    if (nsteps > 0) M = M * M;
  }
  // J in (pos, vel) coordinates
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return (P.transpose() * J * P - J).cwiseAbs().maxCoeff();
}

// ---- assembly ----------------------------------------------------------------

inline OscSystem assemble_vacuum(const std::vector<double>& mode_omegas) {
  OscSystem sys;
  sys.Lambda = Eigen::Map<const Eigen::VectorXd>(mode_omegas.data(),
                                                 mode_omegas.size());
  sys.S = Eigen::MatrixXd::Zero(sys.Lambda.size(), 0);
  return sys;
}

// one transverse mode of a homogeneous medium: S = (1)
inline OscSystem assemble_homogeneous(double omega_alpha,
                                      const BathDiscretization& bath) {
  if (!(omega_alpha > 0.0))
    throw validation_error("assemble_homogeneous requires omega_alpha > 0");
  OscSystem sys;
  sys.Lambda = Eigen::VectorXd::Constant(1, omega_alpha);
  sys.S = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sys.bath = {bath};
  return sys;
}

// longitudinal cell: no transverse field modes, e = -ptil
inline OscSystem assemble_longitudinal(const BathDiscretization& bath) {
  OscSystem sys;
  sys.Lambda = Eigen::VectorXd(0);
  sys.S = Eigen::MatrixXd::Zero(0, 1);
  sys.bath = {bath};
  return sys;
}

// 1D slab: Born-von-Karman box of length L with cos/sin standing modes
// (k = 2 pi m / L, m = 1..n_modes, polarization fixed), cells of width
// (hi-lo)/n_cells carrying the bath. Overlaps are exact integrals of the
// mode functions over the cells.
inline OscSystem assemble_slab(double L, int n_modes, double lo, double hi,
                               int n_cells, const BathDiscretization& bath) {
  if (!(L > 0.0) || n_modes < 1 || n_cells < 1 || !(hi > lo) || hi > L)
    throw validation_error("bad slab geometry");
  OscSystem sys;
  const int nf = 2 * n_modes;
  sys.Lambda = Eigen::VectorXd(nf);
  sys.S = Eigen::MatrixXd::Zero(nf, n_cells);
  sys.bath.assign(n_cells, bath);
  const double dz = (hi - lo) / n_cells;
  for (int m = 1; m <= n_modes; ++m) {
    const double k = 2.0 * pi * m / L;
    sys.Lambda[2 * (m - 1)] = k;
    sys.Lambda[2 * (m - 1) + 1] = k;
    for (int c = 0; c < n_cells; ++c) {
      const double za = lo + c * dz, zb = za + dz;
      const double norm = std::sqrt(2.0 / (L * dz));
      sys.S(2 * (m - 1), c) = norm * (std::sin(k * zb) - std::sin(k * za)) / k;
      sys.S(2 * (m - 1) + 1, c) =
          -norm * (std::cos(k * zb) - std::cos(k * za)) / k;
    }
  }
  for (int c = 0; c < n_cells; ++c)
    sys.truncation_loss = std::max(sys.truncation_loss,
                                   std::abs(1.0 - sys.S.col(c).squaredNorm()));
  return sys;
}

// D(z) and E(z) of a slab system state at a point
inline double slab_displacement_at(const OscSystem& sys, double L,
                                   const StateVector& z, double zpt) {
  double d = 0.0;
  const int n_modes = sys.n_field() / 2;
  for (int m = 1; m <= n_modes; ++m) {
    const double k = 2.0 * pi * m / L;
    const double norm = std::sqrt(2.0 / L);
    d += sys.Lambda[2 * (m - 1)] * z.pos[2 * (m - 1)] * norm * std::cos(k * zpt);
    d += sys.Lambda[2 * (m - 1) + 1] * z.pos[2 * (m - 1) + 1] * norm *
         std::sin(k * zpt);
  }
  return d;
}

// ---- (0)/(s) split -----------------------------------------------------------

// free bath polarization ptil^(0)(t) of cell c from the initial data
inline double free_polarization(const OscSystem& sys, const StateVector& z0,
                                int c, double t) {
  const auto& b = sys.bath[c];
  const int off = sys.n_field() + sys.bath_offset(c);
  double p = 0.0;
  for (int i = 0; i < b.size(); ++i)
    p += b.g[i] * (std::cos(b.omega[i] * t) * z0.pos[off + i] +
                   std::sin(b.omega[i] * t) * z0.vel[off + i] / b.omega[i]);
  return p;
}

struct SplitResult {
  std::vector<double> t;
  std::vector<double> q_free;   // U(t) qdot0 + Udot(t) q0
  std::vector<double> q_scat;   // int H(tau) omega_alpha ptil0(t - tau) dtau
  std::vector<double> q_total;  // from the trajectory
  double residual = 0.0;        // sup |q - q_free - q_scat| / sup |q|
};

// Homogeneous single-mode systems only (n_field = n_cells = 1, S = 1).
inline SplitResult split_free_scattered(const OscSystem& sys,
                                        const Trajectory& traj,
                                        const std::vector<PolaritonRoot>& roots,
                                        double omega_alpha) {
  if (sys.n_field() != 1 || sys.n_cells() != 1)
    throw validation_error("split requires the homogeneous one-mode system");
  const StateVector& z0 = traj.states.front();
  const double q0 = z0.pos[0], qd0 = z0.vel[0];
  const double h = traj.dt;
  const std::size_t n = traj.states.size();
  // precompute H(j h) and S0(j h) = omega_alpha ptil0(j h)
  std::vector<double> H(n), S0(n);
  for (std::size_t j = 0; j < n; ++j) {
    H[j] = h_residue(roots, omega_alpha, j * h);
    S0[j] = omega_alpha * free_polarization(sys, z0, 0, j * h);
  }
  SplitResult r;
  r.t = traj.t;
  double sup = 0.0, supq = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double tau = m * h;
    const double qf = u_residue(roots, omega_alpha, tau) * qd0 +
                      u_residue_dot(roots, omega_alpha, tau) * q0;
    // composite Simpson over [0, t_m] (trapezoid patch on an odd tail)
    double conv = 0.0;
    if (m >= 2) {
      const std::size_t mm = m - (m % 2);
      double s = H[0] * S0[m] + H[mm] * S0[m - mm];
      for (std::size_t j = 1; j < mm; ++j)
        s += (j % 2 ? 4.0 : 2.0) * H[j] * S0[m - j];
      conv = s * h / 3.0;
      if (m % 2) conv += 0.5 * h * (H[m - 1] * S0[1] + H[m] * S0[0]);
    } else if (m == 1) {
      conv = 0.5 * h * (H[0] * S0[1] + H[1] * S0[0]);
    }
    const double q = traj.states[m].pos[0];
    r.q_free.push_back(qf);
    r.q_scat.push_back(conv);
    r.q_total.push_back(q);
    sup = std::max(sup, std::abs(q - qf - conv));
    supq = std::max(supq, std::abs(q));
  }
  r.residual = sup / std::max(supq, 1e-300);
  return r;
}

// ---- time reversal -----------------------------------------------------------

// Applies q_T(t) = q(-t), v_T(t) = -v(-t) to a stored trajectory and measures
// the equation-of-motion residual of the reversed samples with a 5-point
// second-difference stencil. The microscopic system is reversible, so the
// residual is pure discretization noise.
inline double time_reversal_check(const OscSystem& sys, const Trajectory& traj) {
  const std::size_t n = traj.states.size();
  if (n < 5) throw validation_error("trajectory too short for the stencil");
  const double h = traj.dt;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    // reversed sample index: r(j) = n-1-j
    const auto& pm2 = traj.states[n - 1 - (i - 2)].pos;
    const auto& pm1 = traj.states[n - 1 - (i - 1)].pos;
    const auto& p0 = traj.states[n - 1 - i].pos;
    const auto& pp1 = traj.states[n - 1 - (i + 1)].pos;
    const auto& pp2 = traj.states[n - 1 - (i + 2)].pos;
    const Eigen::VectorXd dd =
        (-pm2 + 16.0 * pm1 - 30.0 * p0 + 16.0 * pp1 - pp2) / (12.0 * h * h);
    const Eigen::VectorXd acc = acceleration(sys, p0);
    worst = std::max(worst, (dd - acc).cwiseAbs().maxCoeff());
    scale = std::max(scale, acc.cwiseAbs().maxCoeff());
  }
  return worst / std::max(scale, 1e-300);
}

// ---- Langevin truncation experiment -------------------------------------------

// Linear superposition: z(t) = z_field(t) + z_bath(t). The Langevin-noise
// prescription reconstructs the field from the bath-sourced part only, so its
// error is exactly the field content of the field-only-initial-data
// trajectory. error(t) = sqrt(EM[z_field(t)] / EM[z_field(0)]).
struct TruncationReport {
  std::vector<double> t;
  std::vector<double> error_rel;
  double plateau = 0.0;             // RMS of error over the last quarter
  double energy_unaccounted = 0.0;  // conserved energy of the free-field part
};

inline TruncationReport langevin_truncation_experiment(const OscSystem& sys,
                                                       const StateVector& z0,
                                                       double T, double dt,
                                                       int order = 4,
                                                       int stride = 8) {
  StateVector zf = zero_state(sys);
  zf.pos.head(sys.n_field()) = z0.pos.head(sys.n_field());
  zf.vel.head(sys.n_field()) = z0.vel.head(sys.n_field());
  const double e0 = detail::em_energy(sys, zf);
  if (!(e0 > 0.0))
    throw validation_error("experiment needs nonzero photon content");
  const auto traj = integrate(sys, zf, T, dt, order, stride);
  TruncationReport r;
  r.t = traj.t;
  for (const auto& z : traj.states)
    r.error_rel.push_back(std::sqrt(detail::em_energy(sys, z) / e0));
  const std::size_t n = r.error_rel.size();
  double s = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 3 * n / 4; i < n; ++i, ++cnt)
    s += r.error_rel[i] * r.error_rel[i];
  r.plateau = std::sqrt(s / std::max<std::size_t>(cnt, 1));
  r.energy_unaccounted = total_energy(sys, traj.states.back());
  return r;
}

// ---- longitudinal evolution ----------------------------------------------------

// chi_eff(tau) = -2 sum_m Im[ e^{-i Omega_m tau} / eps'(Omega_m) ] over the
// longitudinal roots (D stores d eps/d omega there).
inline double chi_eff_residue(const std::vector<PolaritonRoot>& lroots,
                              double tau) {
  double s = 0.0;
  for (const auto& r : lroots)
    s -= 2.0 * (std::exp(complex(0.0, -tau) * r.Omega) / r.D).imag();
  return s;
}

struct LongitudinalSolution {
  std::vector<double> t;
  std::vector<double> volterra;  // P from stepping the memory equation
  std::vector<double> residue;   // P from the chi_eff convolution
  double sup_diff = 0.0;
};

namespace detail {

// trapezoid stepping of P = P0 - K * P (chi(0) = 0 keeps it explicit)
inline std::vector<double> volterra_step(const std::function<double(double)>& K,
                                         const std::vector<double>& P0,
                                         double h, bool kernel_on_solution) {
  const std::size_t n = P0.size();
  std::vector<double> P(n), Kv(n);
  for (std::size_t j = 0; j < n; ++j) Kv[j] = K(j * h);
  for (std::size_t m = 0; m < n; ++m) {
    double conv = 0.0;
    const auto& f = kernel_on_solution ? P : P0;
    for (std::size_t j = 1; j < m; ++j) conv += Kv[j] * f[m - j];
    if (m >= 1) conv += 0.5 * (Kv[0] * f[m] + Kv[m] * f[0]);
    P[m] = (P0[m] - h * conv) /
           (kernel_on_solution && m >= 1 ? 1.0 + 0.5 * h * Kv[0] : 1.0);
  }
  return P;
}

}  // namespace detail

inline LongitudinalSolution longitudinal_evolution(
    const Medium& medium, const std::function<double(double)>& P0, double T,
    double h) {
  const auto n = static_cast<std::size_t>(std::llround(T / h));
  const auto lroots =
      medium.resonances().empty()
          ? std::vector<PolaritonRoot>{}
          : longitudinal_roots(medium);
  const auto chi = [&](double tau) { return chi_time(medium, tau); };
  const auto keff = [&](double tau) { return chi_eff_residue(lroots, tau); };
  // Richardson over h and h/2 lifts the trapezoid to O(h^4)
  const auto run = [&](const std::function<double(double)>& K, bool on_sol) {
    std::vector<double> p0c(n + 1), p0f(2 * n + 1);
    for (std::size_t j = 0; j <= n; ++j) p0c[j] = P0(j * h);
    for (std::size_t j = 0; j <= 2 * n; ++j) p0f[j] = P0(j * 0.5 * h);
    const auto coarse = detail::volterra_step(K, p0c, h, on_sol);
    const auto fine = detail::volterra_step(K, p0f, 0.5 * h, on_sol);
    std::vector<double> out(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
      out[j] = (4.0 * fine[2 * j] - coarse[j]) / 3.0;
    return out;
  };
  LongitudinalSolution sol;
  sol.volterra = run(chi, true);
  sol.residue = run(keff, false);
  for (std::size_t j = 0; j <= n; ++j) {
    sol.t.push_back(j * h);
    sol.sup_diff =
        std::max(sol.sup_diff, std::abs(sol.volterra[j] - sol.residue[j]));
  }
  return sol;
}

// ---- emergent mode fit ----------------------------------------------------------

// Least-squares linear prediction of order 2m on uniform samples; returns the
// least-damped positive-frequency root Omega with q ~ e^{-i Omega t}.
inline complex fit_dominant_mode(const std::vector<double>& q, double dt,
                                 int order = 4) {
  const int n = static_cast<int>(q.size());
  if (n < 3 * order)
    throw validation_error("too few samples for the linear-prediction fit");
  Eigen::MatrixXd A(n - order, order);
  Eigen::VectorXd rhs(n - order);
  for (int i = 0; i + order < n; ++i) {
    for (int k = 0; k < order; ++k) A(i, k) = q[i + k];
    rhs(i) = q[i + order];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(order, order);
  for (int k = 0; k < order; ++k) comp(order - 1, k) = c(k);
  comp.topRightCorner(order - 1, order - 1) =
      Eigen::MatrixXd::Identity(order - 1, order - 1);
  const Eigen::VectorXcd roots = comp.eigenvalues();
  complex best(0.0, -1e300);
  for (int k = 0; k < order; ++k) {
    const complex W = complex(0.0, 1.0) * std::log(roots(k)) / dt;
    if (W.real() <= 0.0) continue;
    if (W.imag() > best.imag()) best = W;  // least damped
  }
  if (best.imag() == -1e300)
    throw validation_error("no positive-frequency mode found in the fit");
  return best;
}

}  // namespace polariton

#endif
