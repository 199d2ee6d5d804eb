#ifndef POLARITON_MEDIUM_HPP
#define POLARITON_MEDIUM_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace polariton {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

struct pole_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// One Lorentz resonance: f/(omega_n^2 - (omega + i gamma)^2).
// f in squared-frequency units, gamma = 0 only for the explicit lossless path.
struct LorentzResonance {
  double f = 0.0;
  double omega = 0.0;
  double gamma = 0.0;
};

class Medium {
public:
  Medium() = default;

  explicit Medium(std::vector<LorentzResonance> res, std::string label = {})
      : resonances_(std::move(res)), label_(std::move(label)) {
    for (const auto& r : resonances_) {
      if (!(r.f > 0.0) || !(r.omega > 0.0))
        throw validation_error("resonance requires f > 0 and omega > 0");
      if (r.gamma < 0.0)
        throw validation_error("resonance requires gamma >= 0 (passivity)");
    }
  }

  // Test-only escape hatch: skips the passivity check so that a gamma < 0
  // medium can be planted to exercise the upper-half-plane zero counter.
  static Medium unchecked(std::vector<LorentzResonance> res, std::string label = {}) {
    Medium m;
    m.resonances_ = std::move(res);
    m.label_ = std::move(label);
    return m;
  }

  const std::vector<LorentzResonance>& resonances() const { return resonances_; }
  const std::string& label() const { return label_; }
  bool vacuum() const { return resonances_.empty(); }

  bool lossless() const {
    for (const auto& r : resonances_)
      if (r.gamma != 0.0) return false;
    return true;
  }

  double max_omega() const {
    double m = 0.0;
    for (const auto& r : resonances_) m = std::max(m, r.omega);
    return m;
  }

  double max_gamma() const {
    double m = 0.0;
    for (const auto& r : resonances_) m = std::max(m, r.gamma);
    return m;
  }

  double min_gamma() const {
    if (resonances_.empty()) return 0.0;
    double m = resonances_.front().gamma;
    for (const auto& r : resonances_) m = std::min(m, r.gamma);
    return m;
  }

private:
  std::vector<LorentzResonance> resonances_;
  std::string label_;
};

inline constexpr double pole_threshold_factor = 1e-12;

inline complex epsilon(const Medium& medium, complex omega) {
  complex eps = 1.0;
  for (const auto& r : medium.resonances()) {
    const complex z = omega + complex(0.0, r.gamma);
    const complex den = r.omega * r.omega - z * z;
    if (std::abs(den) < pole_threshold_factor * r.omega * r.omega)
      throw pole_error("epsilon evaluated at a resonance pole");
    eps += r.f / den;
  }
  return eps;
}

// d(eps)/d(omega), analytic.
inline complex epsilon_derivative(const Medium& medium, complex omega) {
  complex d = 0.0;
  for (const auto& r : medium.resonances()) {
    const complex z = omega + complex(0.0, r.gamma);
    const complex den = r.omega * r.omega - z * z;
    d += 2.0 * r.f * z / (den * den);
  }
  return d;
}

inline double chi_time(const Medium& medium, double tau) {
  if (tau < 0.0) throw validation_error("chi_time requires tau >= 0");
  double chi = 0.0;
  for (const auto& r : medium.resonances())
    chi += r.f * std::exp(-r.gamma * tau) * std::sin(r.omega * tau) / r.omega;
  return chi;
}

inline double sigma_of_omega(const Medium& medium, double omega) {
  if (!(omega > 0.0)) throw validation_error("sigma_of_omega requires omega > 0");
  return omega * epsilon(medium, omega).imag();
}

// Max deviation between eps'(omega) - 1 and the principal-value Hilbert
// transform of eps''. PV handled by subtracting the value at the singular
// point; the leftover integral has the closed form below.
inline double kramers_kronig_residual(const Medium& medium, double omega_max,
                                      std::size_t n_points) {
  if (medium.vacuum() || medium.min_gamma() <= 0.0)
    throw validation_error("kramers_kronig_residual requires absorptive media");
  if (n_points < 256) throw validation_error("kramers_kronig_residual: n_points >= 256");

  const double h = omega_max / static_cast<double>(n_points);
  std::vector<double> g(n_points);  // g(w) = w * eps''(w) on midpoints
  for (std::size_t i = 0; i < n_points; ++i) {
    const double w = (static_cast<double>(i) + 0.5) * h;
    g[i] = w * epsilon(medium, w).imag();
  }

  double worst = 0.0;
  // evaluate on node points, away from both endpoints
  for (std::size_t j = n_points / 16; j <= n_points / 2; j += n_points / 64) {
    const double w0 = static_cast<double>(j) * h;
    const double g0 = w0 * epsilon(medium, w0).imag();
    double sum = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const double w = (static_cast<double>(i) + 0.5) * h;
      sum += (g[i] - g0) / (w * w - w0 * w0);
    }
    double pv = sum * h;
    pv += g0 / (2.0 * w0) * std::log((omega_max - w0) / (omega_max + w0));
    const double lhs = epsilon(medium, w0).real() - 1.0;
    worst = std::max(worst, std::abs(lhs - (2.0 / pi) * pv));
  }
  return worst;
}

}  // namespace polariton

#endif
