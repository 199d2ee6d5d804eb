#ifndef POLARITON_PROPAGATORS_HPP
#define POLARITON_PROPAGATORS_HPP

#include <fftw3.h>

#include <vector>

#include "polariton/dispersion.hpp"

namespace polariton {

enum class PropagatorKind { H, U, dUdt, DeltaChi };

struct PropagatorCurve {
  std::vector<double> tau;
  std::vector<double> value;
  PropagatorKind kind = PropagatorKind::H;
};

struct incomplete_roots_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct branch_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sum-rule diagnostics over a root set. Im-sum targets 0, Re-sum targets 1;
// both certify completeness of the branch sum.
inline double sum_rule_im(const std::vector<PolaritonRoot>& roots, double omega_alpha) {
  double s = 0.0;
  for (const auto& r : roots) s += (1.0 / r.D).imag();
  return s / omega_alpha;
}

inline double sum_rule_re(const std::vector<PolaritonRoot>& roots, double omega_alpha) {
  double s = 0.0;
  for (const auto& r : roots) s += (r.eps * r.Omega / r.D).real();
  return s / omega_alpha;
}

inline void require_complete(const std::vector<PolaritonRoot>& roots,
                             double omega_alpha, double tol = 1e-8) {
  if (std::abs(sum_rule_im(roots, omega_alpha)) > tol ||
      std::abs(sum_rule_re(roots, omega_alpha) - 1.0) > tol)
    throw incomplete_roots_error("root set fails the completeness sum rules");
}

// H_alpha(tau) = sum_m (-1/2 i omega_alpha) e^{-i Omega_m tau}/D_m + c.c.
inline double h_residue(const std::vector<PolaritonRoot>& roots,
                        double omega_alpha, double tau) {
  if (tau <= 0.0) return 0.0;
  double s = 0.0;
  for (const auto& r : roots)
    s -= (std::exp(complex(0.0, -tau) * r.Omega) / r.D).imag();
  return s / omega_alpha;
}

// U_alpha: same expansion weighted by eps(Omega_m).
inline double u_residue(const std::vector<PolaritonRoot>& roots,
                        double omega_alpha, double tau) {
  if (tau <= 0.0) return 0.0;
  double s = 0.0;
  for (const auto& r : roots)
    s -= (r.eps * std::exp(complex(0.0, -tau) * r.Omega) / r.D).imag();
  return s / omega_alpha;
}

inline double u_residue_dot(const std::vector<PolaritonRoot>& roots,
                            double omega_alpha, double tau) {
  double s = 0.0;
  for (const auto& r : roots)
    s += (r.eps * r.Omega * std::exp(complex(0.0, -tau) * r.Omega) / r.D).real();
  return s / omega_alpha;
}

inline double h_residue_dot(const std::vector<PolaritonRoot>& roots,
                            double omega_alpha, double tau) {
  double s = 0.0;
  for (const auto& r : roots)
    s += (r.Omega * std::exp(complex(0.0, -tau) * r.Omega) / r.D).real();
  return s / omega_alpha;
}

// Per-mode retarded kernel of Delta_chi; c = 1.
inline double delta_chi_mode(const std::vector<PolaritonRoot>& roots,
                             double omega_alpha, double tau) {
  return h_residue(roots, omega_alpha, tau);
}

// Anticausal kernel built from the conjugated (upper-half-plane) roots, i.e.
// from the anticausal permittivity eps*(W) = conj(eps(conj(W))). Equals the
// causal kernel at -tau.
inline double h_anticausal(const std::vector<PolaritonRoot>& roots,
                           double omega_alpha, double tau) {
  if (tau >= 0.0) return 0.0;
  double s = 0.0;
  for (const auto& r : roots)
    s += (std::exp(complex(0.0, -tau) * std::conj(r.Omega)) / std::conj(r.D)).imag();
  return s / omega_alpha;
}

namespace detail {

struct BromwichTable {
  std::vector<double> tau;    // uniform grid starting at 0
  std::vector<double> value;  // correction part, vacuum pole handled analytically
  double gamma = 0.0;
  double omega_alpha = 0.0;
  bool weight_eps = false;

  // full propagator at arbitrary tau in the window (cubic interpolation of the
  // smooth correction plus the exact vacuum term)
  double at(double t) const {
    const double dt = tau[1] - tau[0];
    double corr;
    const double half_window = 0.5 * dt * static_cast<double>(tau.size());
    double tm = t;  // negative times live at the top of the periodic window
    if (tm < 0.0) tm += dt * static_cast<double>(tau.size());
    const double x = tm / dt;
    const long j = std::lround(std::floor(x));
    const long n = static_cast<long>(tau.size());
    if (t > half_window || -t > half_window)
      throw validation_error("tau outside the Bromwich inversion window");
    const double u = x - static_cast<double>(j);
    auto v = [&](long k) { return value[static_cast<std::size_t>(((k % n) + n) % n)]; };
    // 4-point Lagrange
    const double f0 = v(j - 1), f1 = v(j), f2 = v(j + 1), f3 = v(j + 2);
    corr = -u * (u - 1.0) * (u - 2.0) / 6.0 * f0 + (u * u - 1.0) * (u - 2.0) / 2.0 * f1 -
           u * (u + 1.0) * (u - 2.0) / 2.0 * f2 + u * (u * u - 1.0) / 6.0 * f3;
    corr *= std::exp(gamma * t);
    const double vac = t > 0.0 ? std::sin(omega_alpha * t) / omega_alpha : 0.0;
    return vac + corr;
  }
};

inline BromwichTable bromwich_invert(const Medium& medium, double omega_alpha,
                                     double gamma_shift, bool weight_eps,
                                     std::size_t n_fft, double domega) {
  BromwichTable tab;
  tab.gamma = gamma_shift;
  tab.omega_alpha = omega_alpha;
  tab.weight_eps = weight_eps;
  const long N = static_cast<long>(n_fft);
  std::vector<std::complex<double>> buf(n_fft);
  const double a = omega_alpha * omega_alpha;
  for (long k = 0; k < N; ++k) {
    const double w = (static_cast<double>(k) - static_cast<double>(N / 2)) * domega;
    const complex z(w, gamma_shift);
    const complex eps = epsilon(medium, z);
    const complex A = a - eps * z * z;
    const complex B = a - z * z;
    // subtract the vacuum pole term (inverted analytically) so the remainder
    // decays fast enough for the finite window
    complex r;
    if (weight_eps)
      r = (eps * B - A) / (A * B);  // eps/A - 1/B
    else
      r = (B - A) / (A * B);  // 1/A - 1/B
    buf[k] = r;
  }
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(N),
                                    reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double dtau = 2.0 * pi / (static_cast<double>(N) * domega);
  tab.tau.resize(n_fft);
  tab.value.resize(n_fft);
  const double scale = domega / (2.0 * pi);
  for (long j = 0; j < N; ++j) {
    tab.tau[static_cast<std::size_t>(j)] = static_cast<double>(j) * dtau;
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;  // e^{i pi j} from the w-origin shift
    tab.value[static_cast<std::size_t>(j)] =
        scale * sgn * buf[static_cast<std::size_t>(j)].real();
  }
  return tab;
}

inline double default_domega(const Medium& medium, double omega_alpha) {
  double d = omega_alpha / 64.0;
  if (!medium.vacuum() && medium.min_gamma() > 0.0)
    d = std::min(d, medium.min_gamma() / 16.0);
  return d;
}

}  // namespace detail

inline constexpr std::size_t bromwich_default_n = 1u << 20;

// Numerical Bromwich inversion of 1/(omega_alpha^2 - eps(w+ig)(w+ig)^2) on the
// requested tau grid; the independent oracle for h_residue.
inline PropagatorCurve h_numeric(const Medium& medium, double omega_alpha,
                                 const std::vector<double>& taus,
                                 double gamma_shift = 0.0) {
  if (gamma_shift <= 0.0)
    gamma_shift = medium.vacuum() ? 1e-3 * omega_alpha : medium.min_gamma() / 4.0;
  if (gamma_shift <= 0.0)
    throw validation_error("h_numeric requires gamma_shift > 0 (lossless medium)");
  const auto tab = detail::bromwich_invert(medium, omega_alpha, gamma_shift, false,
                                           bromwich_default_n,
                                           detail::default_domega(medium, omega_alpha));
  PropagatorCurve c;
  c.kind = PropagatorKind::H;
  c.tau = taus;
  c.value.reserve(taus.size());
  for (double t : taus) c.value.push_back(tab.at(t));
  return c;
}

inline PropagatorCurve u_numeric(const Medium& medium, double omega_alpha,
                                 const std::vector<double>& taus,
                                 double gamma_shift = 0.0) {
  if (gamma_shift <= 0.0)
    gamma_shift = medium.vacuum() ? 1e-3 * omega_alpha : medium.min_gamma() / 4.0;
  if (gamma_shift <= 0.0)
    throw validation_error("u_numeric requires gamma_shift > 0 (lossless medium)");
  const auto tab = detail::bromwich_invert(medium, omega_alpha, gamma_shift, true,
                                           bromwich_default_n,
                                           detail::default_domega(medium, omega_alpha));
  PropagatorCurve c;
  c.kind = PropagatorKind::U;
  c.tau = taus;
  c.value.reserve(taus.size());
  for (double t : taus) c.value.push_back(tab.at(t));
  return c;
}

// exp(i omega sqrt(eps) R)/(4 pi R) with the decaying branch.
inline complex scalar_green(const Medium& medium, double R, complex omega) {
  if (!(R > 0.0)) throw validation_error("scalar_green requires R > 0");
  const complex eps = epsilon(medium, omega);
  if (eps.imag() == 0.0 && eps.real() < 0.0)
    throw branch_error("eps on the negative real axis: branch ambiguous");
  const complex k = omega * std::sqrt(eps);
  return std::exp(complex(0.0, 1.0) * k * R) / (4.0 * pi * R);
}

}  // namespace polariton

#endif
