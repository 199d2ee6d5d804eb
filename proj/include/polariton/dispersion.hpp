#ifndef POLARITON_DISPERSION_HPP
#define POLARITON_DISPERSION_HPP

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "polariton/medium.hpp"

namespace polariton {

enum class RootFamily { transverse, longitudinal };

// One member of the "-" root family (Re > 0, Im <= 0); the mirror -conj(Omega)
// is implied and never stored. D is the residue derivative: d(omega sqrt(eps))
// for transverse roots (branch fixed by sqrt(eps) = omega_alpha/Omega at the
// root), d(eps)/d(omega) for longitudinal roots.
struct PolaritonRoot {
  complex Omega;
  complex D;
  complex eps;  // eps(Omega), cached for the weighted residue sums
  int m = 0;
  RootFamily family = RootFamily::transverse;
  double omega_alpha = 0.0;  // 0 for longitudinal roots
};

struct SearchRect {
  double re_min, re_max, im_min, im_max;
};

struct root_count_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct contour_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline SearchRect default_search_rect(const Medium& medium, double omega_alpha) {
  const double wmax = std::max(medium.max_omega(), 0.0);
  return SearchRect{1e-9 * std::max(omega_alpha, 1.0),
                    3.0 * (wmax + omega_alpha),
                    -10.0 * medium.max_gamma() - omega_alpha, 0.0};
}

namespace detail {

// Entire secular functions: the rational secular equations multiplied through
// by prod_n (omega_n^2 - (W + i gamma_n)^2), clearing the poles of eps so the
// winding number counts zeros only.
inline complex secular_entire_transverse(const Medium& medium, double omega_alpha,
                                         complex W) {
  const auto& res = medium.resonances();
  const std::size_t n = res.size();
  std::vector<complex> den(n);
  complex prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const complex z = W + complex(0.0, res[i].gamma);
    den[i] = res[i].omega * res[i].omega - z * z;
    prod *= den[i];
  }
  complex value = (omega_alpha * omega_alpha - W * W) * prod;
  for (std::size_t i = 0; i < n; ++i) {
    complex part = res[i].f;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) part *= den[j];
    value -= W * W * part;
  }
  return value;
}

inline complex secular_entire_longitudinal(const Medium& medium, complex W) {
  const auto& res = medium.resonances();
  const std::size_t n = res.size();
  std::vector<complex> den(n);
  complex prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const complex z = W + complex(0.0, res[i].gamma);
    den[i] = res[i].omega * res[i].omega - z * z;
    prod *= den[i];
  }
  complex value = prod;
  for (std::size_t i = 0; i < n; ++i) {
    complex part = res[i].f;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) part *= den[j];
    value += part;
  }
  return value;
}

// Winding number of an entire function around a rectangle by phase tracking
// along the boundary, with adaptive refinement of any step whose phase jump
// is ambiguous.
inline int winding_rect(const std::function<complex(complex)>& f, const SearchRect& r) {
  const std::array<complex, 4> corners = {
      complex(r.re_min, r.im_min), complex(r.re_max, r.im_min),
      complex(r.re_max, r.im_max), complex(r.re_min, r.im_max)};
  double total = 0.0;
  for (int side = 0; side < 4; ++side) {
    const complex a = corners[side];
    const complex b = corners[(side + 1) % 4];
    // stack of parameter intervals with cached endpoint values
    struct Seg { double t0, t1; complex f0, f1; int depth; };
    std::vector<Seg> stack;
    const int n0 = 32;
    std::vector<complex> vals(n0 + 1);
    for (int i = 0; i <= n0; ++i) {
      const double t = static_cast<double>(i) / n0;
      vals[i] = f(a + (b - a) * t);
      if (vals[i] == complex(0.0, 0.0))
        throw contour_error("zero on search-rectangle boundary");
    }
    for (int i = n0 - 1; i >= 0; --i)
      stack.push_back({static_cast<double>(i) / n0,
                       static_cast<double>(i + 1) / n0, vals[i], vals[i + 1], 0});
    while (!stack.empty()) {
      Seg s = stack.back();
      stack.pop_back();
      const double dphi = std::arg(s.f1 / s.f0);
      if (std::abs(dphi) < pi / 2) {
        total += dphi;
        continue;
      }
      if (s.depth > 48)
        throw contour_error("phase tracking did not converge (zero on or near boundary)");
      const double tm = 0.5 * (s.t0 + s.t1);
      const complex fm = f(a + (b - a) * tm);
      if (fm == complex(0.0, 0.0))
        throw contour_error("zero on search-rectangle boundary");
      stack.push_back({tm, s.t1, fm, s.f1, s.depth + 1});
      stack.push_back({s.t0, tm, s.f0, fm, s.depth + 1});
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * pi)));
}

struct Secular {
  std::function<complex(complex)> value;       // rational secular function
  std::function<complex(complex)> derivative;  // its analytic derivative
  std::function<complex(complex)> entire;      // pole-cleared version (counting)
  double scale;                                // residual normalization
};

inline Secular make_secular(const Medium& medium, RootFamily family,
                            double omega_alpha) {
  Secular s;
  if (family == RootFamily::transverse) {
    s.value = [&medium, omega_alpha](complex W) {
      return omega_alpha * omega_alpha - epsilon(medium, W) * W * W;
    };
    s.derivative = [&medium](complex W) {
      return -(epsilon_derivative(medium, W) * W * W + 2.0 * epsilon(medium, W) * W);
    };
    s.entire = [&medium, omega_alpha](complex W) {
      return secular_entire_transverse(medium, omega_alpha, W);
    };
    s.scale = omega_alpha * omega_alpha;
  } else {
    s.value = [&medium](complex W) { return epsilon(medium, W); };
    s.derivative = [&medium](complex W) { return epsilon_derivative(medium, W); };
    s.entire = [&medium](complex W) {
      return secular_entire_longitudinal(medium, W);
    };
    s.scale = 1.0;
  }
  return s;
}

inline std::optional<complex> newton_polish(const Secular& s, complex W0,
                                            double tol) {
  complex W = W0;
  for (int it = 0; it < 200; ++it) {
    complex fv;
    try {
      fv = s.value(W);
    } catch (const pole_error&) {
      return std::nullopt;
    }
    if (std::abs(fv) < tol) return W;
    const complex dv = s.derivative(W);
    if (dv == complex(0.0, 0.0)) return std::nullopt;
    complex step = fv / dv;
    // damp wild steps so the iterate cannot escape to another basin abruptly
    const double cap = 0.5 * std::abs(W) + 1.0;
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    W -= step;
  }
  return std::nullopt;
}

inline void find_roots_in(const Secular& s, const SearchRect& rect, double tol,
                          std::vector<complex>& out, int depth = 0) {
  int count;
  try {
    count = winding_rect(s.entire, rect);
  } catch (const contour_error&) {
    if (depth > 60) throw;
    // nudge the boundary off the offending zero and retry
    const double dre = 1e-7 * (rect.re_max - rect.re_min) * (depth + 1);
    const double dim = 1e-7 * (rect.im_max - rect.im_min) * (depth + 1);
    SearchRect r2{rect.re_min - dre, rect.re_max + dre, rect.im_min - dim,
                  rect.im_max + dim};
    find_roots_in(s, r2, tol, out, depth + 1);
    return;
  }
  if (count == 0) return;
  const double w = rect.re_max - rect.re_min;
  const double h = rect.im_max - rect.im_min;
  if (count == 1 || std::max(w, h) < 1e-8) {
    const complex center(0.5 * (rect.re_min + rect.re_max),
                         0.5 * (rect.im_min + rect.im_max));
    auto root = newton_polish(s, center, tol);
    if (root && root->real() >= rect.re_min - 1e-6 * (1.0 + w) &&
        root->real() <= rect.re_max + 1e-6 * (1.0 + w) &&
        root->imag() >= rect.im_min - 1e-6 * (1.0 + h) &&
        root->imag() <= rect.im_max + 1e-6 * (1.0 + h)) {
      for (int k = 1; k < count; ++k) out.push_back(*root);  // multiple root
      out.push_back(*root);
      return;
    }
    if (std::max(w, h) < 1e-10)
      throw root_count_error("Newton polishing failed to converge inside a certified box");
  }
  if (depth > 60)
    throw root_count_error("quadtree subdivision exceeded depth limit");
  // quarter the box (slightly uneven split so roots rarely sit on seams)
  const double rm = rect.re_min + 0.5037 * w;
  const double im = rect.im_min + 0.4963 * h;
  find_roots_in(s, {rect.re_min, rm, rect.im_min, im}, tol, out, depth + 1);
  find_roots_in(s, {rm, rect.re_max, rect.im_min, im}, tol, out, depth + 1);
  find_roots_in(s, {rect.re_min, rm, im, rect.im_max}, tol, out, depth + 1);
  find_roots_in(s, {rm, rect.re_max, im, rect.im_max}, tol, out, depth + 1);
}

inline std::vector<complex> certified_roots(const Secular& s, SearchRect rect,
                                            double tol) {
  // lossless media place roots on the real axis; open the top edge so a
  // passive medium's boundary never passes through a zero
  if (rect.im_max == 0.0)
    rect.im_max = 0.05 * std::max(rect.re_max, 1.0);
  const int expected = winding_rect(s.entire, rect);
  std::vector<complex> roots;
  find_roots_in(s, rect, tol, roots);
  // merge duplicates found across seams
  std::vector<complex> unique;
  for (const auto& r : roots) {
    bool dup = false;
    for (const auto& u : unique)
      if (std::abs(r - u) < 1e-7 * (1.0 + std::abs(u))) dup = true;
    if (!dup) unique.push_back(r);
  }
  if (static_cast<int>(roots.size()) != expected)
    throw root_count_error("polished root count disagrees with argument-principle count");
  std::sort(unique.begin(), unique.end(),
            [](complex a, complex b) { return a.real() < b.real(); });
  return unique;
}

}  // namespace detail

inline std::vector<PolaritonRoot> transverse_roots(const Medium& medium,
                                                   double omega_alpha,
                                                   const SearchRect& search) {
  if (!(omega_alpha > 0.0))
    throw validation_error("transverse_roots requires omega_alpha > 0");
  const auto s = detail::make_secular(medium, RootFamily::transverse, omega_alpha);
  const auto zs = detail::certified_roots(s, search, 1e-12 * s.scale);
  std::vector<PolaritonRoot> roots;
  int m = 0;
  for (const auto& W : zs) {
    if (W.real() <= 0.0) continue;
    PolaritonRoot r;
    r.Omega = W;
    // D = d(omega sqrt(eps)) with sqrt(eps) = omega_alpha/Omega at the root
    r.D = omega_alpha / W + W * W * epsilon_derivative(medium, W) / (2.0 * omega_alpha);
    r.eps = epsilon(medium, W);
    r.m = m++;
    r.family = RootFamily::transverse;
    r.omega_alpha = omega_alpha;
    roots.push_back(r);
  }
  return roots;
}

inline std::vector<PolaritonRoot> transverse_roots(const Medium& medium,
                                                   double omega_alpha) {
  return transverse_roots(medium, omega_alpha,
                          default_search_rect(medium, omega_alpha));
}

inline std::vector<PolaritonRoot> longitudinal_roots(const Medium& medium,
                                                     const SearchRect& search) {
  if (medium.vacuum()) return {};
  const auto s = detail::make_secular(medium, RootFamily::longitudinal, 0.0);
  const auto zs = detail::certified_roots(s, search, 1e-12);
  std::vector<PolaritonRoot> roots;
  int m = 0;
  for (const auto& W : zs) {
    if (W.real() <= 0.0) continue;
    PolaritonRoot r;
    r.Omega = W;
    r.D = epsilon_derivative(medium, W);
    r.eps = epsilon(medium, W);
    r.m = m++;
    r.family = RootFamily::longitudinal;
    roots.push_back(r);
  }
  return roots;
}

inline std::vector<PolaritonRoot> longitudinal_roots(const Medium& medium) {
  const double scale = std::max(medium.max_omega(), 1.0);
  SearchRect rect{1e-9 * scale, 3.0 * scale + 10.0,
                  -10.0 * medium.max_gamma() - scale, 0.0};
  return longitudinal_roots(medium, rect);
}

// Verifies the implied mirror root -conj(Omega) also solves the secular
// equation; returns the worst relative residual.
inline double root_symmetry_check(const std::vector<PolaritonRoot>& roots,
                                  const Medium& medium) {
  double worst = 0.0;
  for (const auto& r : roots) {
    const complex W = -std::conj(r.Omega);
    double resid;
    if (r.family == RootFamily::transverse)
      resid = std::abs(r.omega_alpha * r.omega_alpha - epsilon(medium, W) * W * W) /
              (r.omega_alpha * r.omega_alpha);
    else
      resid = std::abs(epsilon(medium, W));
    worst = std::max(worst, resid);
  }
  return worst;
}

namespace detail {

// adaptive Simpson along a parametrized path segment
template <typename F>
complex adaptive_simpson(const F& f, double a, double b, complex fa, complex fm,
                         complex fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const complex flm = f(lm), frm = f(rm);
  const complex whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const complex delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) < 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <typename F>
complex integrate_segment(const F& f, double a, double b, double tol) {
  return adaptive_simpson(f, a, b, f(a), f(0.5 * (a + b)), f(b), tol, 40);
}

}  // namespace detail

// Winding number of Z(omega) = eps(omega) omega^2 around a = omega_alpha^2
// along the real axis plus the upper semicircle of radius R, by adaptive
// quadrature of Z'/(Z - a). For passive media this counts upper-half-plane
// zeros (the poles of Z all lie below the axis) and must be 0.
inline int upper_half_zero_count(const Medium& medium, double omega_alpha,
                                 double R) {
  if (!(R > 5.0 * std::max(medium.max_omega(), omega_alpha)))
    throw validation_error("upper_half_zero_count requires R >> omega_n, omega_alpha");
  const complex a = omega_alpha * omega_alpha;
  // refuse contours passing too close to a pole of the integrand
  for (const auto& r : medium.resonances())
    if (std::abs(r.gamma) < 1e-6 * r.omega)
      throw contour_error("integrand pole too close to the real-axis contour");
  const auto integrand = [&](complex w) {
    const complex Z = epsilon(medium, w) * w * w;
    const complex Zp = epsilon_derivative(medium, w) * w * w +
                       2.0 * epsilon(medium, w) * w;
    return Zp / (Z - a);
  };
  complex total = 0.0;
  // real axis, split at the resonance features for the adaptive quadrature
  std::vector<double> knots = {-R, R};
  for (const auto& r : medium.resonances()) {
    knots.push_back(r.omega);
    knots.push_back(-r.omega);
  }
  knots.push_back(omega_alpha);
  knots.push_back(-omega_alpha);
  knots.push_back(0.0);
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double x0 = knots[i], x1 = knots[i + 1];
    if (x1 <= x0) continue;
    const auto f = [&](double t) { return integrand(complex(t, 0.0)); };
    total += detail::integrate_segment(f, x0, x1, 1e-10);
  }
  // upper semicircle
  const auto g = [&](double theta) {
    const complex w = R * std::exp(complex(0.0, theta));
    return integrand(w) * complex(0.0, 1.0) * w;  // dw = i w dtheta
  };
  total += detail::integrate_segment(g, 0.0, pi, 1e-10);
  const double winding = (total / (2.0 * pi * complex(0.0, 1.0))).real();
  const long n = std::lround(winding);
  if (std::abs(winding - static_cast<double>(n)) > 0.25)
    throw contour_error("winding-number quadrature did not converge to an integer");
  return static_cast<int>(n);
}

}  // namespace polariton

#endif
