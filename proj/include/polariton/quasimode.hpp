#ifndef POLARITON_QUASIMODE_HPP
#define POLARITON_QUASIMODE_HPP

#include <algorithm>

#include "polariton/dispersion.hpp"

namespace polariton {

enum class WindowShape { hard_indicator };

struct FrequencyWindow {
  double center = 0.0;
  double width = 0.0;  // full width
  WindowShape shape = WindowShape::hard_indicator;

  double lo() const { return center - 0.5 * width; }
  double hi() const { return center + 0.5 * width; }
};

struct window_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Half-width of the quasimode line centered at w. For a transverse line the
// commutator integrand is Lorentzian in omega with half-width
// eps'' w^2 / |d(eps' w^2)/dw|; at a longitudinal line (eps' zero) it is
// eps'' / |d eps'/dw|.
inline double line_half_width(const Medium& medium, double w) {
  const complex eps = epsilon(medium, complex(w, 0.0));
  const complex deps = epsilon_derivative(medium, complex(w, 0.0));
  if (std::abs(eps.real()) < 0.05) {
    const double slope = std::abs(deps.real());
    return slope > 0.0 ? std::abs(eps.imag()) / slope : 0.0;
  }
  const double slope = std::abs(deps.real() * w * w + 2.0 * eps.real() * w);
  return slope > 0.0 ? std::abs(eps.imag()) * w * w / slope : 0.0;
}

}  // namespace detail

// Default window: delta = max(100 gamma_eff, 1e-3 Omega'), hard indicator,
// with gamma_eff = 10x the local line half-width so the hard cutoff clips at
// most ~0.1% of the (Lorentzian) line mass.
inline FrequencyWindow default_window(const Medium& medium, double Omega_prime) {
  const double gamma_eff = 10.0 * detail::line_half_width(medium, Omega_prime);
  const double delta = std::max(100.0 * gamma_eff, 1e-3 * Omega_prime);
  return {Omega_prime, delta, WindowShape::hard_indicator};
}

namespace detail {

// Bisect g to full precision; g(a) and g(b) must differ in sign.
template <typename G>
double bisect(const G& g, double a, double b) {
  double fa = g(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = g(m);
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Locate a sign change of g inside [lo, hi] by scanning, then bisect.
// Returns false if g does not change sign on the scan grid.
template <typename G>
bool find_line(const G& g, double lo, double hi, double& root) {
  const int n = 64;
  double xa = lo, fa = g(xa);
  for (int i = 1; i <= n; ++i) {
    const double xb = lo + (hi - lo) * i / n;
    const double fb = g(xb);
    if ((fa < 0.0) != (fb < 0.0)) {
      root = bisect(g, xa, xb);
      return true;
    }
    xa = xb;
    fa = fb;
  }
  return false;
}

// Quadrature knots for a sharp line at `peak` with half-width `hw`: a
// geometric ladder peak +- hw * 10^k so the adaptive rule always sees the
// Lorentzian at its own scale.
inline std::vector<double> line_knots(const FrequencyWindow& w, double peak,
                                      double hw) {
  std::vector<double> k = {w.lo(), w.hi()};
  if (peak > w.lo() && peak < w.hi()) {
    k.push_back(peak);
    if (hw > 0.0 && std::isfinite(hw)) {
      for (double t = hw; t < 0.5 * w.width; t *= 10.0) {
        if (peak - t > w.lo()) k.push_back(peak - t);
        if (peak + t < w.hi()) k.push_back(peak + t);
      }
    }
  } else {
    k.push_back(w.center);
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

template <typename F>
double integrate_window(const F& f, const FrequencyWindow& w,
                        const std::vector<double>& knots) {
  if (w.shape != WindowShape::hard_indicator)
    throw validation_error("only the hard-indicator window is implemented");
  const auto cf = [&](double x) { return complex(f(x), 0.0); };
  // rough pass fixes the scale, second pass refines to ~1e-9 relative
  double rough = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    rough += integrate_segment(cf, knots[i], knots[i + 1], 1e-6).real();
  const double tol =
      1e-9 * std::abs(rough) / static_cast<double>(knots.size()) + 1e-300;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    total += integrate_segment(cf, knots[i], knots[i + 1], tol).real();
  return total;
}

// windows must capture the whole resonance: the outermost 10% strips may hold
// at most 1% of the mass
template <typename F>
void check_edge_mass(const F& f, const FrequencyWindow& w, double total) {
  const double strip = 0.1 * w.width;
  const auto cf = [&](double x) { return complex(f(x), 0.0); };
  const double edges =
      (integrate_segment(cf, w.lo(), w.lo() + strip, 1e-10) +
       integrate_segment(cf, w.hi() - strip, w.hi(), 1e-10))
          .real();
  if (std::abs(edges) > 0.01 * std::abs(total))
    throw window_error("resonance not captured: edge mass exceeds 1% of the window");
}

}  // namespace detail

struct GroupVelocityFactors {
  double dOmega2_domega_alpha2;  // = v_g/(n c)
  double brillouin;              // d(W eps')/dW + omega_alpha^2/W^2
  double two_n_over_vg;
};

// Implicit differentiation of omega_alpha^2 = eps'(W) W^2 at real W.
inline GroupVelocityFactors group_velocity_factor(const Medium& medium,
                                                  double Omega_prime) {
  const double W = Omega_prime;
  const double ep = epsilon(medium, complex(W, 0.0)).real();
  if (!(ep > 0.0))
    throw validation_error("group_velocity_factor requires eps'(Omega') > 0");
  const double dep = epsilon_derivative(medium, complex(W, 0.0)).real();
  const double dwa2_dW = dep * W * W + 2.0 * ep * W;
  GroupVelocityFactors g;
  g.dOmega2_domega_alpha2 = 2.0 * W / dwa2_dW;
  g.brillouin = (ep + W * dep) + ep;  // d(W eps')/dW + wa^2/W^2 with wa^2 = eps' W^2
  const double n = std::sqrt(ep);
  const double vg = 2.0 * std::sqrt(ep * W * W) / dwa2_dW;  // dW/d(omega_alpha)
  g.two_n_over_vg = 2.0 * n / vg;
  return g;
}

// (1/pi) int_window w^4 eps''/|omega_alpha^2 - eps w^2|^2; target is
// (Omega/2) dOmega^2/domega_alpha^2.
inline double transverse_commutator_integral(const Medium& medium,
                                             double omega_alpha,
                                             const FrequencyWindow& window) {
  const double a = omega_alpha * omega_alpha;
  const auto f = [&](double w) {
    const complex eps = epsilon(medium, complex(w, 0.0));
    const double num = w * w * w * w * eps.imag();
    return num / std::norm(a - eps * w * w) / pi;
  };
  const auto secular = [&](double w) {
    return a - epsilon(medium, complex(w, 0.0)).real() * w * w;
  };
  double peak = window.center, hw = 0.0;
  if (detail::find_line(secular, window.lo(), window.hi(), peak))
    hw = detail::line_half_width(medium, peak);
  const double total =
      detail::integrate_window(f, window, detail::line_knots(window, peak, hw));
  detail::check_edge_mass(f, window, total);
  return total;
}

// (1/pi) int_window eps''/|eps|^2; target 1/|d eps'/dw| at the eps' zero.
inline double longitudinal_commutator_integral(const Medium& medium,
                                               const FrequencyWindow& window) {
  const auto f = [&](double w) {
    const complex eps = epsilon(medium, complex(w, 0.0));
    return eps.imag() / std::norm(eps) / pi;
  };
  const auto eps_re = [&](double w) {
    return epsilon(medium, complex(w, 0.0)).real();
  };
  double peak = window.center, hw = 0.0;
  if (detail::find_line(eps_re, window.lo(), window.hi(), peak))
    hw = detail::line_half_width(medium, peak);
  return detail::integrate_window(f, window,
                                  detail::line_knots(window, peak, hw));
}

struct QuasimodePopulation {
  double Omega;
  double population;  // |f|^2
};

inline double quasimode_energy(const std::vector<QuasimodePopulation>& pops) {
  double e = 0.0;
  for (const auto& p : pops) {
    if (p.population < 0.0)
      throw validation_error("quasimode populations must be non-negative");
    e += p.Omega * p.population;
  }
  return e;
}

}  // namespace polariton

#endif
