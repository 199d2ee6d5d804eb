#ifndef POLARITON_HOPFIELD_HPP
#define POLARITON_HOPFIELD_HPP

#include <Eigen/Dense>

#include "polariton/medium.hpp"

namespace polariton {

// Lossless Drude-Lorentz model eps(W) = 1 + wp^2/(w0^2 - W^2).
struct HopfieldMedium {
  double omega0;
  double omegap;

  HopfieldMedium(double w0, double wp) : omega0(w0), omegap(wp) {
    if (!(w0 > 0.0) || !(wp > 0.0))
      throw validation_error("HopfieldMedium requires omega0, omegap > 0");
  }

  double omega_L() const { return std::hypot(omega0, omegap); }
  Medium to_medium() const { return Medium({{omegap * omegap, omega0, 0.0}}); }
};

struct HopfieldFrequencies {
  double Omega_plus;
  double Omega_minus;
  double omega_L;
};

inline HopfieldFrequencies hopfield_frequencies(double omega_alpha,
                                                const HopfieldMedium& m) {
  if (!(omega_alpha > 0.0))
    throw validation_error("hopfield_frequencies requires omega_alpha > 0");
  const double wa2 = omega_alpha * omega_alpha;
  const double wL2 = m.omega0 * m.omega0 + m.omegap * m.omegap;
  const double s = wa2 + wL2;
  const double disc = std::sqrt(s * s - 4.0 * wa2 * m.omega0 * m.omega0);
  return {std::sqrt(0.5 * (s + disc)), std::sqrt(0.5 * (s - disc)),
          std::sqrt(wL2)};
}

// Real per-mode amplitudes (e, b, p, pdot) of one transverse (alpha, j) pair.
struct HopfieldModeState {
  double e = 0.0;
  double b = 0.0;
  double p = 0.0;
  double pdot = 0.0;
};

struct PolaritonAmplitudes {
  complex phi_plus;
  complex phi_minus;
};

namespace detail {

// Eigenvector of the mode dynamics for branch frequency W, normalized to unit
// electric-field component: u(t) = phi v e^{-iWt} + c.c.
inline Eigen::Vector4cd hopfield_eigenvector(double omega_alpha,
                                             const HopfieldMedium& m, double W) {
  const complex i(0.0, 1.0);
  const double pw = m.omegap * m.omegap / (m.omega0 * m.omega0 - W * W);
  Eigen::Vector4cd v;
  v << complex(1.0), -i * omega_alpha / W, complex(pw), -i * W * pw;
  return v;
}

// mode equations: e' = w_a b - pdot, b' = -w_a e, p' = pdot,
// pdot' = wp^2 e - w0^2 p
inline Eigen::Matrix4d hopfield_mode_matrix(double omega_alpha,
                                            const HopfieldMedium& m) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A(0, 1) = omega_alpha;
  A(0, 3) = -1.0;
  A(1, 0) = -omega_alpha;
  A(2, 3) = 1.0;
  A(3, 0) = m.omegap * m.omegap;
  A(3, 2) = -m.omega0 * m.omega0;
  return A;
}

}  // namespace detail

inline PolaritonAmplitudes hopfield_transform(const HopfieldModeState& s,
                                              double omega_alpha,
                                              const HopfieldMedium& m) {
  const auto fr = hopfield_frequencies(omega_alpha, m);
  if (std::abs(fr.Omega_plus - fr.Omega_minus) < 1e-12 * fr.Omega_plus)
    throw validation_error("degenerate Hopfield branches: transform singular");
  const auto vp = detail::hopfield_eigenvector(omega_alpha, m, fr.Omega_plus);
  const auto vm = detail::hopfield_eigenvector(omega_alpha, m, fr.Omega_minus);
  Eigen::Matrix4cd M;
  M.col(0) = vp;
  M.col(1) = vp.conjugate();
  M.col(2) = vm;
  M.col(3) = vm.conjugate();
  Eigen::Vector4cd u;
  u << s.e, s.b, s.p, s.pdot;
  const Eigen::Vector4cd phi = M.fullPivLu().solve(u);
  return {phi(0), phi(2)};
}

inline HopfieldModeState hopfield_inverse(const PolaritonAmplitudes& a,
                                          double omega_alpha,
                                          const HopfieldMedium& m,
                                          double t = 0.0) {
  const auto fr = hopfield_frequencies(omega_alpha, m);
  const complex i(0.0, 1.0);
  const Eigen::Vector4cd u =
      a.phi_plus * std::exp(-i * fr.Omega_plus * t) *
          detail::hopfield_eigenvector(omega_alpha, m, fr.Omega_plus) +
      a.phi_minus * std::exp(-i * fr.Omega_minus * t) *
          detail::hopfield_eigenvector(omega_alpha, m, fr.Omega_minus);
  return {2.0 * u(0).real(), 2.0 * u(1).real(), 2.0 * u(2).real(),
          2.0 * u(3).real()};
}

// Branch weight of the diagonal form, normalized to the field amplitude.
inline double hopfield_branch_coefficient(double omega_alpha,
                                          const HopfieldMedium& m, double W) {
  const double r = omega_alpha * omega_alpha / (W * W) - 1.0;
  const double q = m.omega0 * m.omega0 / (m.omegap * m.omegap);
  return 2.0 * (1.0 + q * r * r);
}

// Documented rescaling from phi to unit-commutator ladder amplitudes f:
// f = phi * sqrt(coefficient/Omega), so that sum Omega |f|^2 = H_diag.
inline double ladder_rescale(double omega_alpha, const HopfieldMedium& m,
                             double W) {
  return std::sqrt(hopfield_branch_coefficient(omega_alpha, m, W) / W);
}

inline double mode_energy_raw(const HopfieldModeState& s, const HopfieldMedium& m) {
  const double wp2 = m.omegap * m.omegap;
  return 0.5 * (s.e * s.e + s.b * s.b) +
         (s.pdot * s.pdot + m.omega0 * m.omega0 * s.p * s.p) / (2.0 * wp2);
}

struct HamiltonianComparison {
  double raw;
  double diag;
  double deviation;  // relative
};

struct LongitudinalModeState {
  double p = 0.0;
  double pdot = 0.0;
};

inline complex longitudinal_amplitude(const LongitudinalModeState& s,
                                      const HopfieldMedium& m) {
  const double wL = m.omega_L();
  return 0.5 * complex(s.p, s.pdot / wL);
}

inline HamiltonianComparison hamiltonian_diagonal(
    const std::vector<std::pair<double, HopfieldModeState>>& transverse,
    const std::vector<LongitudinalModeState>& longitudinal,
    const HopfieldMedium& m) {
  const double wp2 = m.omegap * m.omegap;
  const double wL = m.omega_L();
  double raw = 0.0, diag = 0.0;
  for (const auto& [wa, s] : transverse) {
    raw += mode_energy_raw(s, m);
    const auto fr = hopfield_frequencies(wa, m);
    const auto amp = hopfield_transform(s, wa, m);
    diag += hopfield_branch_coefficient(wa, m, fr.Omega_plus) * std::norm(amp.phi_plus);
    diag += hopfield_branch_coefficient(wa, m, fr.Omega_minus) * std::norm(amp.phi_minus);
  }
  for (const auto& s : longitudinal) {
    // E_par = -P, so the raw density collapses to (pdot^2 + wL^2 p^2)/(2 wp^2)
    raw += (s.pdot * s.pdot + wL * wL * s.p * s.p) / (2.0 * wp2);
    diag += 2.0 * wL * wL / wp2 * std::norm(longitudinal_amplitude(s, m));
  }
  const double scale = std::max(std::abs(raw), 1e-300);
  return {raw, diag, std::abs(raw - diag) / scale};
}

inline double longitudinal_oscillation(double P0, double Pdot0,
                                       const HopfieldMedium& m, double t,
                                       double t0 = 0.0) {
  const double wL = m.omega_L();
  return std::cos(wL * (t - t0)) * P0 + std::sin(wL * (t - t0)) * Pdot0 / wL;
}

}  // namespace polariton

#endif
