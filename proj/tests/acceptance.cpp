// Acceptance suite: one pass/fail line per criterion, tolerances pinned here.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "polariton/evolution.hpp"
#include "polariton/hopfield.hpp"
#include "polariton/quasimode.hpp"

using namespace polariton;

namespace {

int g_failures = 0;

struct Scope {
  const char* name;
  double budget_s;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  ~Scope() {
    const double el =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (el > budget_s) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over budget");
    }
    std::printf("%s  %-22s (%.2f s%s%s)\n", ok ? "PASS" : "FAIL", name, el,
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++g_failures;
  }
};

std::string num(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

const Medium& reference_medium() {
  static const Medium med({{1.0, 1.0, 0.1}});
  return med;
}

void criterion_1_sum_rules() {
  Scope s{"1 sum-rules", 1.0};
  for (double wa : {0.5, 1.0, 2.0}) {
    const auto roots = transverse_roots(reference_medium(), wa);
    const double im = std::abs(sum_rule_im(roots, wa));
    const double re = std::abs(sum_rule_re(roots, wa) - 1.0);
    s.require(im < 1e-8, "im sum " + num(im) + " at wa=" + num(wa));
    s.require(re < 1e-8, "re sum err " + num(re) + " at wa=" + num(wa));
  }
}

void criterion_2_propagator_oracle() {
  Scope s{"2 propagator-oracle", 10.0};
  const double wa = 1.0;
  const auto roots = transverse_roots(reference_medium(), wa);
  std::vector<double> taus;
  for (int i = 1; i <= 200; ++i) taus.push_back(20.0 / wa * i / 200.0);
  const auto hn = h_numeric(reference_medium(), wa, taus);
  const auto un = u_numeric(reference_medium(), wa, taus);
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    worst = std::max(worst, std::abs(h_residue(roots, wa, taus[i]) - hn.value[i]));
    worst = std::max(worst, std::abs(u_residue(roots, wa, taus[i]) - un.value[i]));
  }
  s.require(worst < 1e-6, "Bromwich deviation " + num(worst));
  const double b = std::max({std::abs(h_residue(roots, wa, 0.0)),
                             std::abs(u_residue(roots, wa, 0.0)),
                             std::abs(u_residue_dot(roots, wa, 0.0) - 1.0)});
  s.require(b < 1e-8, "boundary values " + num(b));
}

void criterion_3_upper_half_plane() {
  Scope s{"3 winding-number", 30.0};
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> uf(0.2, 2.0), uw(0.5, 3.0),
      ug(0.01, 0.5), ua(0.5, 2.0);
  for (int i = 0; i < 10; ++i) {
    std::vector<LorentzResonance> res;
    const int nr = 1 + i % 3;
    for (int k = 0; k < nr; ++k) res.push_back({uf(rng), uw(rng), ug(rng)});
    const Medium med(res);
    const double wa = ua(rng);
    const double R = 10.0 * std::max(med.max_omega(), wa) + 50.0;
    const int n = upper_half_zero_count(med, wa, R);
    s.require(n == 0, "passive medium " + std::to_string(i) + " count " +
                          std::to_string(n));
  }
  const auto planted = Medium::unchecked({{1.0, 1.0, -0.1}});
  const int n = upper_half_zero_count(planted, 1.0, 100.0);
  s.require(n >= 1, "planted violation count " + std::to_string(n));
}

void criterion_4_hopfield() {
  Scope s{"4 hopfield", 5.0};
  const HopfieldMedium hm{1.0, 1.0};
  const auto fr = hopfield_frequencies(1.0, hm);
  // independent quartic oracle in x = W^2
  Eigen::Matrix2d comp;
  comp << 0.0, -1.0, 1.0, 3.0;
  Eigen::EigenSolver<Eigen::Matrix2d> es(comp);
  double xlo = es.eigenvalues()(0).real(), xhi = es.eigenvalues()(1).real();
  if (xlo > xhi) std::swap(xlo, xhi);
  const double closed =
      std::max(std::abs(fr.Omega_plus * fr.Omega_plus - 0.5 * (3.0 + std::sqrt(5.0))),
               std::abs(fr.Omega_minus * fr.Omega_minus - 0.5 * (3.0 - std::sqrt(5.0))));
  const double quartic = std::max(std::abs(fr.Omega_plus * fr.Omega_plus - xhi),
                                  std::abs(fr.Omega_minus * fr.Omega_minus - xlo));
  s.require(closed < 1e-12, "closed form " + num(closed));
  s.require(quartic < 1e-12, "quartic oracle " + num(quartic));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uw(0.3, 2.5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<double, HopfieldModeState>> ts = {
        {uw(rng), {u(rng), u(rng), u(rng), u(rng)}}};
    std::vector<LongitudinalModeState> ls = {{u(rng), u(rng)}};
    worst = std::max(worst, hamiltonian_diagonal(ts, ls, hm).deviation);
  }
  s.require(worst < 1e-10, "H_raw vs H_diag " + num(worst));

  // longitudinal ODE oracle: leapfrog of Pddot = -wL^2 P
  const double wL = std::sqrt(2.0), dt = 1e-5, T = 4.0;
  double P = 0.8, V = -0.3;
  const double P0 = P, V0 = V;
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  for (std::size_t i = 0; i < n; ++i) {
    V -= 0.5 * dt * wL * wL * P;
    P += dt * V;
    V -= 0.5 * dt * wL * wL * P;
  }
  const double err = std::abs(P - longitudinal_oscillation(P0, V0, hm, T));
  s.require(err < 1e-7, "omega_L ODE oracle " + num(err));
}

void criterion_5_milonni() {
  Scope s{"5 milonni-commutators", 10.0};
  const Medium med({{1.0, 1.0, 1e-4}});
  const double wa = 1.0;
  const auto roots = transverse_roots(med, wa);
  // lower branch
  complex Wm = roots[0].Omega;
  for (const auto& r : roots)
    if (r.Omega.real() < Wm.real()) Wm = r.Omega;
  const double W = Wm.real();
  const auto g = group_velocity_factor(med, W);
  const double target = 0.5 * W * g.dOmega2_domega_alpha2;
  const auto win = default_window(med, W);
  const double I = transverse_commutator_integral(med, wa, win);
  s.require(std::abs(I - target) < 0.01 * target,
            "transverse " + num(std::abs(I - target) / target));

  const double wL = std::sqrt(2.0);
  const auto lroots = longitudinal_roots(med);
  const double M = std::abs(epsilon_derivative(med, lroots[0].Omega).real());
  const auto lwin = default_window(med, wL);
  const double IL = longitudinal_commutator_integral(med, lwin);
  s.require(std::abs(IL - 1.0 / M) < 0.01 / M,
            "longitudinal " + num(std::abs(IL * M - 1.0)));

  // 4x window-width sweep
  double lo = 1e300, hi = -1e300;
  for (double f : {1.0, 2.0, 4.0}) {
    FrequencyWindow w = win;
    w.width *= f;
    const double v = transverse_commutator_integral(med, wa, w);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  s.require((hi - lo) < 0.005 * target, "width sweep " + num((hi - lo) / target));
}

void criterion_6_green_identities() {
  Scope s{"6 green-identities", 60.0};
  const auto L = depolarization_dyad(ExclusionShape::sphere(1.0));
  s.require((L - Mat3::Identity() / 3.0).cwiseAbs().maxCoeff() < 1e-10,
            "sphere depolarization");

  {  // S = eps w^2 G + delta per mode, exact
    const BoxModeBasis basis(6.0, 2.5);
    const complex w(0.8, 0.15);
    const Vec3 x(0.4, -0.2, 0.1), xp(-0.1, 0.3, 0.0);
    double worst = 0.0;
    for (const auto& m : basis.modes) {
      const auto d = mode_dyads(basis, m, reference_medium(), x, xp, w);
      const Mat3c rhs = epsilon(reference_medium(), w) * w * w *
                            (d.G_perp + d.G_par) +
                        d.delta_perp + d.delta_par;
      worst = std::max(worst, (d.S - rhs).cwiseAbs().maxCoeff());
    }
    s.require(worst < 1e-12, "mode identity " + num(worst));
  }

  const complex w(0.7, 0.1);
  {  // single cell vs closed form
    ScattererGrid grid;
    grid.dx = 0.2;
    grid.cells.push_back({Eigen::Vector3i::Zero(), Medium({{0.5, 1.2, 0.1}})});
    const auto op = lippmann_schwinger_solve(grid, Medium{}, w);
    const double V = grid.cell_volume();
    const complex chi = epsilon(grid.cells[0].medium, w) - 1.0;
    const complex gb = -1.0 / (3.0 * w * w * V);
    const complex closed = gb / (1.0 - w * w * chi * V * gb);
    const double err =
        (op.cell_pair(0, 0) - closed * Mat3c::Identity()).cwiseAbs().maxCoeff() /
        std::abs(closed);
    s.require(err < 1e-12, "single cell " + num(err));
  }

  {  // two-step background equivalence on 5^3
    const Medium med1({{0.5, 1.2, 0.1}});
    const Medium med2({{0.3, 2.0, 0.2}});
    const Medium med12({{0.5, 1.2, 0.1}, {0.3, 2.0, 0.2}});
    ScattererGrid grid;
    grid.dx = 0.25;
    for (int i = 0; i < 5; ++i)
      for (int jj = 0; jj < 5; ++jj)
        for (int k = 0; k < 5; ++k)
          grid.cells.push_back({Eigen::Vector3i(i, jj, k), med12});
    const auto direct = lippmann_schwinger_solve(grid, Medium{}, w);
    ScattererGrid bg_grid = grid;
    for (auto& c : bg_grid.cells) c.medium = med1;
    const auto background = lippmann_schwinger_solve(bg_grid, Medium{}, w);
    LippmannSchwingerOperator two_step(grid, background);
    double worst = 0.0;
    const int n = static_cast<int>(grid.cells.size());
    for (int c = 0; c < n; c += 31)
      for (int d = 0; d < n; d += 17)
        worst = std::max(worst, (direct.cell_pair(c, d) - two_step.cell_pair(c, d))
                                    .cwiseAbs()
                                    .maxCoeff());
    const Vec3 x(2.0, 1.5, -0.8), xp(-1.0, 0.4, 2.2);
    worst = std::max(worst,
                     (direct.query(x, xp) - two_step.query(x, xp)).cwiseAbs().maxCoeff());
    s.require(worst < 1e-8, "two-step equivalence " + num(worst));
  }
}

void criterion_7_emergence() {
  Scope s{"7 microscopic-emergence", 120.0};
  const Medium med = reference_medium();
  const double wa = 0.5;
  const auto sys = assemble_homogeneous(wa, discretize_bath(med, 400));
  auto z0 = zero_state(sys);
  z0.pos[0] = 1.0;
  const auto tr = integrate(sys, z0, 60.0, 0.004, 6, 10);
  std::vector<double> q;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    if (tr.t[i] >= 20.0) q.push_back(tr.states[i].pos[0]);
  const complex W = fit_dominant_mode(q, tr.dt, 4);
  const auto roots = transverse_roots(med, wa);
  complex target = roots[0].Omega;
  for (const auto& r : roots)
    if (r.Omega.imag() > target.imag()) target = r.Omega;
  s.require(std::abs(W.real() - target.real()) < 0.01 * std::abs(target.real()),
            "Re Omega " + num(std::abs(W.real() / target.real() - 1.0)));
  s.require(std::abs(W.imag() - target.imag()) < 0.05 * std::abs(target.imag()),
            "Im Omega " + num(std::abs(W.imag() / target.imag() - 1.0)));

  {  // energy drift over 100 periods of the bare mode
    const auto sys1 = assemble_homogeneous(1.0, discretize_bath(med, 400));
    auto z1 = zero_state(sys1);
    z1.pos[0] = 1.0;
    z1.vel[0] = 0.3;
    const double T = 100.0 * 2.0 * pi;
    const auto tr1 = integrate(sys1, z1, T, 0.005, 6, 25000);
    const double e0 = total_energy(sys1, z1);
    double drift = 0.0;
    for (const auto& z : tr1.states)
      drift = std::max(drift, std::abs(total_energy(sys1, z) - e0) / e0);
    s.require(drift < 1e-8, "energy drift " + num(drift));
  }
  {  // symplectic form preservation
    const auto sys2 = assemble_homogeneous(1.0, discretize_bath(med, 30));
    const double dev = symplectic_form_check(sys2, 50.0, 0.005);
    s.require(dev < 1e-8, "symplectic deviation " + num(dev));
  }
}

// pinned regression value for the slab Langevin error plateau (packet, slab
// and bath exactly as below); re-measure if any of those parameters change
constexpr double slab_plateau_regression = 0.442;

void criterion_8_unitarity_failure() {
  Scope s{"8 unitarity-failure", 120.0};
  {  // localized absorber: the free field never fully decays
    const double L = 40.0;
    const Medium med({{1.0, 1.0, 0.5}});
    const auto sys = assemble_slab(L, 200, 20.0, 24.0, 8, discretize_bath(med, 150));
    auto z0 = zero_state(sys);
    const double zc = 10.0, sig = 2.0, k0 = 1.0;
    const auto envelope = [&](double z) {
      return std::exp(-0.5 * (z - zc) * (z - zc) / (sig * sig)) * std::cos(k0 * z);
    };
    const int nq = 4000;
    double mean = 0.0;
    for (int i = 0; i < nq; ++i) mean += envelope((i + 0.5) * L / nq) / nq;
    for (int m = 1; m <= sys.n_field() / 2; ++m) {
      const double k = 2.0 * pi * m / L, norm = std::sqrt(2.0 / L);
      double dc = 0.0, ds = 0.0, vc = 0.0, vs = 0.0;
      const double h = L / nq;
      for (int i = 0; i < nq; ++i) {
        const double z = (i + 0.5) * h;
        const double D0 = envelope(z) - mean;
        const double dp = (envelope(z + 1e-5) - envelope(z - 1e-5)) / 2e-5;
        dc += h * D0 * norm * std::cos(k * z);
        ds += h * D0 * norm * std::sin(k * z);
        vc += -h * dp * norm * std::cos(k * z);
        vs += -h * dp * norm * std::sin(k * z);
      }
      z0.pos[2 * (m - 1)] = dc / k;
      z0.pos[2 * (m - 1) + 1] = ds / k;
      z0.vel[2 * (m - 1)] = vc / k;
      z0.vel[2 * (m - 1) + 1] = vs / k;
    }
    const auto rep = langevin_truncation_experiment(sys, z0, 35.0, 0.003, 4, 50);
    s.require(rep.plateau > 0.05, "plateau " + num(rep.plateau) + " not positive");
    if (slab_plateau_regression > 0.0)
      s.require(std::abs(rep.plateau - slab_plateau_regression) <
                    0.1 * slab_plateau_regression,
                "plateau " + num(rep.plateau) + " off regression " +
                    num(slab_plateau_regression));
    else
      s.detail += "measured plateau " + num(rep.plateau);
  }
  {  // homogeneous absorber: the same error vanishes
    const Medium med({{1.0, 1.0, 0.8}});
    const auto roots = transverse_roots(med, 1.0);
    double min_im = 1e300;
    for (const auto& r : roots) min_im = std::min(min_im, -r.Omega.imag());
    const auto sys = assemble_homogeneous(1.0, discretize_bath(med, 2000));
    auto z0 = zero_state(sys);
    z0.pos[0] = 1.0;
    const auto rep =
        langevin_truncation_experiment(sys, z0, 20.0 / min_im, 0.0025);
    s.require(rep.error_rel.back() < 1e-6,
              "homogeneous error " + num(rep.error_rel.back()));
  }
  {  // truncated surrogate breaks the symplectic form; the full flow keeps it
    const auto sys = assemble_homogeneous(1.0, discretize_bath(reference_medium(), 30));
    const double full = symplectic_form_check(sys, 50.0, 0.005);
    const double trunc = symplectic_form_check(sys, 50.0, 0.005, 6, true);
    s.require(full < 1e-8, "full flow deviation " + num(full));
    s.require(trunc > 0.1, "truncated deviation " + num(trunc) + " not O(1)");
  }
}

void criterion_9_time_reversal() {
  Scope s{"9 time-reversal", 30.0};
  const auto sys = assemble_homogeneous(1.0, discretize_bath(reference_medium(), 100));
  auto z0 = zero_state(sys);
  z0.pos[0] = 1.0;
  z0.pos[sys.n_field() + 11] = 0.3;
  const auto tr = integrate(sys, z0, 2.0, 0.001, 6, 1);
  const double res = time_reversal_check(sys, tr);
  s.require(res < 1e-7, "reversed EOM residual " + num(res));

  const auto roots = transverse_roots(reference_medium(), 1.0);
  double worst = 0.0;
  for (int i = 1; i <= 500; ++i) {
    const double tau = 0.02 * i;
    worst = std::max(worst, std::abs(h_anticausal(roots, 1.0, -tau) -
                                     h_residue(roots, 1.0, tau)));
  }
  s.require(worst < 1e-14, "anticausal kernel mismatch " + num(worst));
}

}  // namespace

int main() {
  criterion_1_sum_rules();
  criterion_2_propagator_oracle();
  criterion_3_upper_half_plane();
  criterion_4_hopfield();
  criterion_5_milonni();
  criterion_6_green_identities();
  criterion_7_emergence();
  criterion_8_unitarity_failure();
  criterion_9_time_reversal();
  return g_failures;
}
