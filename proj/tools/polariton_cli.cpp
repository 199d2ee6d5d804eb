// polariton: command-line front end for the header library.
// Subcommands: dispersion, propagator, sumrules, green, hopfield, quasimode,
// evolve, verify. Exit codes: 0 success, 1 validation error, 2 numerical
// tolerance failure (machine-readable JSON on stderr in both failure cases).

#include <charconv>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "polariton/evolution.hpp"
#include "polariton/hopfield.hpp"
#include "polariton/io.hpp"
#include "polariton/quasimode.hpp"

namespace p = polariton;
using p::json;

namespace {

struct tolerance_failure {
  json detail;
};

constexpr int scenario_version = 1;

json load_scenario(const std::string& path,
                   const std::vector<std::string>& required,
                   const std::vector<std::string>& optional) {
  if (path.empty())
    throw p::validation_error("this subcommand needs --scenario <file>");
  json j = p::load_json(path);
  auto req = required;
  req.insert(req.begin(), "version");
  p::detail::check_fields(j, "scenario", req, optional);
  if (j["version"] != scenario_version)
    throw p::validation_error("scenario: unsupported version (expected 1)");
  return j;
}

// shortest round-trip decimal form
std::string fmt(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

// data sink: a file under --out, or stdout when no directory was given
class Sink {
public:
  Sink(const std::string& dir, const std::string& name) {
    if (!dir.empty()) {
      file_.open(dir + "/" + name);
      if (!file_)
        throw p::validation_error("cannot write " + dir + "/" + name);
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

std::vector<double> sweep_values(const json& j, const char* context) {
  std::vector<double> v;
  if (j.is_array()) {
    for (const auto& e : j) v.push_back(p::detail::as_number(e, context));
  } else {
    p::detail::check_fields(j, context, {"min", "max", "count"});
    const double lo = j["min"].get<double>(), hi = j["max"].get<double>();
    const int n = j["count"].get<int>();
    if (n < 1 || !(hi >= lo))
      throw p::validation_error(std::string(context) + ": bad sweep range");
    for (int i = 0; i < n; ++i)
      v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  }
  return v;
}

// ---- dispersion ------------------------------------------------------------

int cmd_dispersion(const std::string& scen, const std::string& out_dir) {
  const json j = load_scenario(scen, {"medium", "omega_alpha"}, {"family"});
  const p::Medium med = p::medium_from_json(j["medium"]);
  const std::string family = j.value("family", std::string("transverse"));
  Sink sink(out_dir, "dispersion.csv");
  sink.out() << "k,re_omega,im_omega,re_d,im_d,family,m\n";
  if (family == "longitudinal") {
    for (const auto& r : p::longitudinal_roots(med))
      sink.out() << "0," << fmt(r.Omega.real()) << "," << fmt(r.Omega.imag())
                 << "," << fmt(r.D.real()) << "," << fmt(r.D.imag())
                 << ",longitudinal," << r.m << "\n";
  } else if (family == "transverse") {
    for (double wa : sweep_values(j["omega_alpha"], "omega_alpha"))
      for (const auto& r : p::transverse_roots(med, wa))
        sink.out() << fmt(wa) << "," << fmt(r.Omega.real()) << ","
                   << fmt(r.Omega.imag()) << "," << fmt(r.D.real()) << ","
                   << fmt(r.D.imag()) << ",transverse," << r.m << "\n";
  } else {
    throw p::validation_error("family must be transverse or longitudinal");
  }
  return 0;
}

// ---- propagator ------------------------------------------------------------

int cmd_propagator(const std::string& scen, const std::string& out_dir) {
  const json j = load_scenario(scen, {"medium", "omega_alpha"},
                               {"tau_max", "n_samples"});
  const p::Medium med = p::medium_from_json(j["medium"]);
  const double wa = p::detail::as_number(j["omega_alpha"], "omega_alpha");
  const double tmax = j.value("tau_max", 20.0 / wa);
  const int n = j.value("n_samples", 200);
  if (n < 2 || !(tmax > 0.0))
    throw p::validation_error("need n_samples >= 2 and tau_max > 0");
  const auto roots = p::transverse_roots(med, wa);
  p::require_complete(roots, wa);
  std::vector<double> taus;
  for (int i = 1; i <= n; ++i) taus.push_back(tmax * i / n);
  const auto hn = p::h_numeric(med, wa, taus);
  Sink sink(out_dir, "propagator.csv");
  sink.out() << "tau,h_residue,h_numeric,u_residue,abs_err\n";
  for (int i = 0; i < n; ++i) {
    const double hr = p::h_residue(roots, wa, taus[i]);
    sink.out() << fmt(taus[i]) << "," << fmt(hr) << "," << fmt(hn.value[i])
               << "," << fmt(p::u_residue(roots, wa, taus[i])) << ","
               << fmt(std::abs(hr - hn.value[i])) << "\n";
  }
  return 0;
}

// ---- sumrules --------------------------------------------------------------

int cmd_sumrules(const std::string& scen, const std::string& out_dir,
                 const std::string& roots_file) {
  const json j = load_scenario(scen, {"medium", "omega_alpha"}, {"tolerance"});
  const p::Medium med = p::medium_from_json(j["medium"]);
  const double tol = j.value("tolerance", 1e-8);
  json report = json::array();
  json failures = json::array();
  for (double wa : sweep_values(j["omega_alpha"], "omega_alpha")) {
    const auto roots =
        roots_file.empty()
            ? p::transverse_roots(med, wa)
            : p::roots_from_json(p::load_json(roots_file), med, wa);
    const double im = p::sum_rule_im(roots, wa);
    const double re = p::sum_rule_re(roots, wa);
    report.push_back({{"omega_alpha", wa},
                      {"im_sum", im},
                      {"re_sum", re},
                      {"n_roots", roots.size()}});
    if (std::abs(im) > tol || std::abs(re - 1.0) > tol)
      failures.push_back({{"omega_alpha", wa},
                          {"im_sum", im},
                          {"re_sum", re},
                          {"tolerance", tol}});
  }
  Sink sink(out_dir, "sumrules.json");
  sink.out() << report.dump(2) << "\n";
  if (!failures.empty())
    throw tolerance_failure{{{"check", "sumrules"}, {"violations", failures}}};
  return 0;
}

// ---- green -----------------------------------------------------------------

p::Vec3 vec3_from_json(const json& j, const char* context) {
  if (!j.is_array() || j.size() != 3)
    throw p::validation_error(std::string(context) + ": expected [x, y, z]");
  return p::Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

int cmd_green(const std::string& scen, const std::string& out_dir) {
  const json j = load_scenario(
      scen, {"medium", "omega", "components", "sweep"}, {"grid", "x", "xp"});
  const p::Medium med = p::medium_from_json(j["medium"]);
  p::detail::check_fields(j["omega"], "omega", {"re"}, {"im"});
  const p::complex omega(j["omega"]["re"].get<double>(),
                         j["omega"].value("im", 0.0));
  std::vector<std::pair<int, int>> comps;
  for (const auto& c : j["components"]) {
    const std::string s = c.get<std::string>();
    if (s.size() != 2 || s.find_first_not_of("xyz") != std::string::npos)
      throw p::validation_error("component must be two of x, y, z");
    comps.push_back({s[0] - 'x', s[1] - 'x'});
  }
  const json sw = j["sweep"];
  p::detail::check_fields(sw, "sweep", {"kind", "min", "max", "count"},
                          {"direction"});
  const auto vals = sweep_values(
      json{{"min", sw["min"]}, {"max", sw["max"]}, {"count", sw["count"]}},
      "sweep");
  const std::string kind = sw["kind"].get<std::string>();

  Sink sink(out_dir, "green.csv");
  sink.out() << (kind == "separation" ? "r" : "omega");
  for (const auto& c : comps) {
    const std::string n = std::string(1, char('x' + c.first)) +
                          std::string(1, char('x' + c.second));
    sink.out() << ",re_" << n << ",im_" << n;
  }
  sink.out() << "\n";

  const auto emit = [&](double key, const p::Mat3c& G) {
    sink.out() << fmt(key);
    for (const auto& c : comps)
      sink.out() << "," << fmt(G(c.first, c.second).real()) << ","
                 << fmt(G(c.first, c.second).imag());
    sink.out() << "\n";
  };

  if (j.contains("grid")) {
    const json gj = j["grid"].is_string()
                        ? p::load_json(j["grid"].get<std::string>())
                        : j["grid"];
    const auto grid = p::grid_from_json(gj);
    const auto bg = p::grid_background_from_json(gj);
    const p::Vec3 x = vec3_from_json(j.at("x"), "x");
    const p::Vec3 xp = vec3_from_json(j.at("xp"), "xp");
    if (kind != "frequency")
      throw p::validation_error("grid mode supports only a frequency sweep");
    for (double w : vals) {
      const auto op = p::lippmann_schwinger_solve(grid, bg, p::complex(w, omega.imag()));
      emit(w, op.query(x, xp));
    }
  } else if (kind == "separation") {
    p::Vec3 dir(1.0, 0.0, 0.0);
    if (sw.contains("direction")) dir = vec3_from_json(sw["direction"], "direction");
    dir.normalize();
    for (double r : vals)
      emit(r, p::g_dyadic_homogeneous(med, r * dir, p::Vec3::Zero(), omega).tensor);
  } else if (kind == "frequency") {
    const p::Vec3 x = vec3_from_json(j.at("x"), "x");
    const p::Vec3 xp = vec3_from_json(j.at("xp"), "xp");
    for (double w : vals)
      emit(w, p::g_dyadic_homogeneous(med, x, xp, p::complex(w, omega.imag())).tensor);
  } else {
    throw p::validation_error("sweep.kind must be separation or frequency");
  }
  return 0;
}

// ---- hopfield ---------------------------------------------------------------

int cmd_hopfield(const std::string& scen, const std::string& out_dir) {
  const json j = load_scenario(scen, {"omega0", "omegap", "omega_alpha"},
                               {"states", "longitudinal_states"});
  const p::HopfieldMedium hm{j["omega0"].get<double>(),
                             j["omegap"].get<double>()};
  Sink sink(out_dir, "hopfield.csv");
  sink.out() << "omega_alpha,omega_plus,omega_minus\n";
  for (double wa : sweep_values(j["omega_alpha"], "omega_alpha")) {
    const auto fr = p::hopfield_frequencies(wa, hm);
    sink.out() << fmt(wa) << "," << fmt(fr.Omega_plus) << ","
               << fmt(fr.Omega_minus) << "\n";
  }
  if (j.contains("states") || j.contains("longitudinal_states")) {
    std::vector<std::pair<double, p::HopfieldModeState>> ts;
    if (j.contains("states"))
      for (const auto& s : j["states"]) {
        p::detail::check_fields(s, "state",
                                {"omega_alpha", "e", "b", "p", "pdot"});
        ts.push_back({s["omega_alpha"].get<double>(),
                      {s["e"].get<double>(), s["b"].get<double>(),
                       s["p"].get<double>(), s["pdot"].get<double>()}});
      }
    std::vector<p::LongitudinalModeState> ls;
    if (j.contains("longitudinal_states"))
      for (const auto& s : j["longitudinal_states"]) {
        p::detail::check_fields(s, "longitudinal state", {"p", "pdot"});
        ls.push_back({s["p"].get<double>(), s["pdot"].get<double>()});
      }
    const auto cmp = p::hamiltonian_diagonal(ts, ls, hm);
    Sink ej(out_dir, "hopfield_energy.json");
    ej.out() << json{{"raw", cmp.raw},
                     {"diag", cmp.diag},
                     {"deviation", cmp.deviation}}
                    .dump(2)
             << "\n";
  }
  return 0;
}

// ---- quasimode ---------------------------------------------------------------

int cmd_quasimode(const std::string& scen, const std::string& out_dir) {
  const json j = load_scenario(scen, {"medium", "omega_alpha"},
                               {"include_longitudinal"});
  const p::Medium med = p::medium_from_json(j["medium"]);
  Sink sink(out_dir, "quasimode.csv");
  sink.out() << "omega_alpha,branch,omega,integral,target,rel_err\n";
  for (double wa : sweep_values(j["omega_alpha"], "omega_alpha")) {
    for (const auto& r : p::transverse_roots(med, wa)) {
      const double W = r.Omega.real();
      const auto win = p::default_window(med, W);
      const double I = p::transverse_commutator_integral(med, wa, win);
      const auto g = p::group_velocity_factor(med, W);
      const double target = 0.5 * W * g.dOmega2_domega_alpha2;
      sink.out() << fmt(wa) << "," << r.m << "," << fmt(W) << "," << fmt(I)
                 << "," << fmt(target) << ","
                 << fmt(std::abs(I - target) / std::abs(target)) << "\n";
    }
  }
  if (j.value("include_longitudinal", false)) {
    for (const auto& r : p::longitudinal_roots(med)) {
      const double W = r.Omega.real();
      const auto win = p::default_window(med, W);
      const double I = p::longitudinal_commutator_integral(med, win);
      const double target = 1.0 / std::abs(r.D.real());
      sink.out() << "0,longitudinal," << fmt(W) << "," << fmt(I) << ","
                 << fmt(target) << ","
                 << fmt(std::abs(I - target) / std::abs(target)) << "\n";
    }
  }
  return 0;
}

// ---- evolve ------------------------------------------------------------------

p::OscSystem system_from_json(const json& j) {
  p::detail::check_fields(
      j, "system", {"kind"},
      {"modes", "medium", "omega_alpha", "n_lines", "omega_cut", "L",
       "n_modes", "lo", "hi", "n_cells"});
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "vacuum") {
    std::vector<double> modes;
    for (const auto& m : j.at("modes"))
      modes.push_back(p::detail::as_number(m, "modes"));
    return p::assemble_vacuum(modes);
  }
  const p::Medium med = p::medium_from_json(j.at("medium"));
  const auto bath = p::discretize_bath(med, j.value("n_lines", 400),
                                       j.value("omega_cut", 0.0));
  if (kind == "homogeneous")
    return p::assemble_homogeneous(j.at("omega_alpha").get<double>(), bath);
  if (kind == "longitudinal") return p::assemble_longitudinal(bath);
  if (kind == "slab")
    return p::assemble_slab(j.at("L").get<double>(),
                            j.at("n_modes").get<int>(),
                            j.at("lo").get<double>(), j.at("hi").get<double>(),
                            j.at("n_cells").get<int>(), bath);
  throw p::validation_error(
      "system.kind must be vacuum, homogeneous, longitudinal, or slab");
}

int cmd_evolve(const std::string& scen, const std::string& out_dir) {
  const json j = load_scenario(scen, {"system", "integrator"},
                               {"initial", "probes", "seed"});
  const auto sys = system_from_json(j["system"]);
  if (sys.truncation_loss > 0.01)
    std::cerr << json{{"warning", "basis truncation"},
                      {"loss", sys.truncation_loss}}
                     .dump()
              << "\n";
  const json ij = j.value("initial", json::object());
  p::detail::check_fields(ij, "initial", {},
                          {"q", "qdot", "bath_amplitude"});
  auto z0 = p::zero_state(sys);
  if (ij.contains("q"))
    for (std::size_t i = 0; i < ij["q"].size() &&
                            i < static_cast<std::size_t>(sys.n_field());
         ++i)
      z0.pos[i] = ij["q"][i].get<double>();
  if (ij.contains("qdot"))
    for (std::size_t i = 0; i < ij["qdot"].size() &&
                            i < static_cast<std::size_t>(sys.n_field());
         ++i)
      z0.vel[i] = ij["qdot"][i].get<double>();
  if (ij.contains("bath_amplitude")) {
    // seeded, so the run is byte-reproducible
    std::mt19937 rng(j.value("seed", 0u));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = ij["bath_amplitude"].get<double>() /
                     std::sqrt(std::max(sys.n_bath_total(), 1));
    for (int i = 0; i < sys.n_bath_total(); ++i) {
      z0.pos[sys.n_field() + i] = a * u(rng);
      z0.vel[sys.n_field() + i] = a * u(rng);
    }
  }
  const json gj = j["integrator"];
  p::detail::check_fields(gj, "integrator", {"dt", "t_final"},
                          {"order", "stride"});
  const auto traj =
      p::integrate(sys, z0, gj["t_final"].get<double>(),
                   gj["dt"].get<double>(), gj.value("order", 6),
                   gj.value("stride", 1));
  std::vector<int> probes;
  if (j.contains("probes"))
    for (const auto& q : j["probes"]) probes.push_back(q.get<int>());
  else
    for (int i = 0; i < std::min(sys.n_field(), 4); ++i) probes.push_back(i);
  for (int q : probes)
    if (q < 0 || q >= sys.dim())
      throw p::validation_error("probe index out of range");

  Sink sink(out_dir, "trajectory.csv");
  sink.out() << "t";
  for (int q : probes) sink.out() << ",q" << q << ",v" << q;
  sink.out() << "\n";
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    sink.out() << fmt(traj.t[i]);
    for (int q : probes)
      sink.out() << "," << fmt(traj.states[i].pos[q]) << ","
                 << fmt(traj.states[i].vel[q]);
    sink.out() << "\n";
  }
  const auto rep = p::energy_report(sys, traj.states.back(), z0);
  const double e0 = p::total_energy(sys, z0);
  Sink ej(out_dir, "energy.json");
  ej.out() << json{{"total", rep.total},
                   {"electromagnetic", rep.electromagnetic},
                   {"material", rep.material},
                   {"h_rem", rep.h_rem},
                   {"h_m0", rep.h_m0},
                   {"drift", e0 > 0.0 ? std::abs(rep.total - e0) / e0 : 0.0},
                   {"truncation_loss", sys.truncation_loss}}
                  .dump(2)
           << "\n";
  return 0;
}

// ---- verify --------------------------------------------------------------------

struct Check {
  std::string name;
  double value;
  double bound;
  bool pass;
};

int cmd_verify(bool quick) {
  std::vector<Check> checks;
  const auto add = [&](const std::string& name, double value, double bound) {
    checks.push_back({name, value, bound, value <= bound});
  };
  const p::Medium med({{1.0, 1.0, 0.1}});

  {  // residue completeness
    double worst = 0.0;
    for (double wa : {0.5, 1.0, 2.0}) {
      const auto roots = p::transverse_roots(med, wa);
      worst = std::max(worst, std::abs(p::sum_rule_im(roots, wa)));
      worst = std::max(worst, std::abs(p::sum_rule_re(roots, wa) - 1.0));
    }
    add("sum_rules", worst, 1e-8);
  }
  {  // Hopfield closed form at the symmetric point
    const auto fr = p::hopfield_frequencies(1.0, {1.0, 1.0});
    const double err =
        std::max(std::abs(fr.Omega_plus * fr.Omega_plus -
                          0.5 * (3.0 + std::sqrt(5.0))),
                 std::abs(fr.Omega_minus * fr.Omega_minus -
                          0.5 * (3.0 - std::sqrt(5.0))));
    add("hopfield_closed_form", err, 1e-12);
  }
  {  // propagator boundary values
    const auto roots = p::transverse_roots(med, 1.0);
    const double err =
        std::max({std::abs(p::h_residue(roots, 1.0, 0.0)),
                  std::abs(p::u_residue(roots, 1.0, 0.0)),
                  std::abs(p::u_residue_dot(roots, 1.0, 0.0) - 1.0)});
    add("propagator_boundary", err, 1e-8);
  }
  {  // spherical depolarization dyad
    const auto L = p::depolarization_dyad(p::ExclusionShape::sphere(0.7));
    add("depolarization_sphere",
        (L - p::Mat3::Identity() / 3.0).cwiseAbs().maxCoeff(), 1e-10);
  }
  {  // plane-wave mode identity S = eps w^2 G + delta, per mode
    const p::BoxModeBasis basis(7.0, 2.0);
    const p::complex w(0.9, 0.2);
    const p::Vec3 x(0.3, -0.4, 0.2), xp(0.0, 0.1, -0.3);
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(basis.modes.size(), 64); ++i) {
      const auto d = p::mode_dyads(basis, basis.modes[i], med, x, xp, w);
      const p::Mat3c lhs = d.S;
      const p::Mat3c rhs = p::epsilon(med, w) * w * w * (d.G_perp + d.G_par) +
                           d.delta_perp + d.delta_par;
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    add("mode_identity", worst, 1e-12);
  }
  {  // vacuum evolution is an exact cosine
    const auto sys = p::assemble_vacuum({1.3});
    auto z0 = p::zero_state(sys);
    z0.pos[0] = 1.0;
    const auto tr = p::integrate(sys, z0, 10.0, 0.01, 6, 1000);
    add("vacuum_cosine",
        std::abs(tr.states.back().pos[0] - std::cos(1.3 * 10.0)), 1e-9);
  }
  {  // lossless longitudinal oscillation at sqrt(2)
    const auto sol = p::longitudinal_evolution(
        p::Medium({{1.0, 1.0, 0.0}}), [](double t) { return std::cos(t); },
        5.0, 0.01);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.t.size(); ++i)
      worst = std::max(worst, std::abs(sol.volterra[i] -
                                       std::cos(std::sqrt(2.0) * sol.t[i])));
    add("longitudinal_sqrt2", worst, 1e-5);
  }

  if (!quick) {
    {  // Bromwich inversion vs residue sum
      const auto roots = p::transverse_roots(med, 1.0);
      std::vector<double> taus;
      for (int i = 1; i <= 40; ++i) taus.push_back(0.5 * i);
      const auto hn = p::h_numeric(med, 1.0, taus);
      double worst = 0.0;
      for (std::size_t i = 0; i < taus.size(); ++i)
        worst = std::max(worst, std::abs(p::h_residue(roots, 1.0, taus[i]) -
                                         hn.value[i]));
      add("bromwich_oracle", worst, 1e-6);
    }
    {  // single-cell scatterer vs the closed-form t-matrix
      p::ScattererGrid grid;
      grid.dx = 0.2;
      grid.cells.push_back({Eigen::Vector3i::Zero(), p::Medium({{0.5, 1.2, 0.1}})});
      const p::complex w(0.7, 0.1);
      const auto op = p::lippmann_schwinger_solve(grid, p::Medium{}, w);
      const double V = grid.cell_volume();
      const p::complex chi = p::epsilon(grid.cells[0].medium, w) - 1.0;
      const p::Mat3c gb = -p::Mat3c::Identity() / (3.0 * w * w * V);
      // closed form for one cell: (I - w^2 gb chi V) G = gb
      const p::Mat3c res =
          (p::Mat3c::Identity() - w * w * chi * V * gb) * op.cell_pair(0, 0) -
          gb;
      add("single_cell_scatterer",
          res.cwiseAbs().maxCoeff() / gb.cwiseAbs().maxCoeff(), 1e-12);
    }
    {  // symplectic form preservation of the coupled flow
      const auto sys =
          p::assemble_homogeneous(1.0, p::discretize_bath(med, 30));
      add("symplectic_form", p::symplectic_form_check(sys, 50.0, 0.005), 1e-8);
    }
    {  // Kramers-Kronig consistency of the medium
      add("kramers_kronig", p::kramers_kronig_residual(med, 200.0, 20000),
          1e-3);
    }
  }

  json failures = json::array();
  for (const auto& c : checks) {
    std::cout << (c.pass ? "ok   " : "FAIL ") << c.name << "  value "
              << fmt(c.value) << "  bound " << fmt(c.bound) << "\n";
    if (!c.pass)
      failures.push_back(
          {{"check", c.name}, {"value", c.value}, {"bound", c.bound}});
  }
  if (!failures.empty())
    throw tolerance_failure{{{"check", "verify"}, {"violations", failures}}};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polariton medium toolkit"};
  app.require_subcommand(1);

  std::string scenario, out_dir, format = "csv", roots_file;
  int threads = 1;
  bool quick = false;

  const auto add_common = [&](CLI::App* c) {
    c->add_option("--scenario", scenario, "scenario JSON file");
    c->add_option("--out", out_dir, "output directory (default: stdout)");
    c->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    c->add_option("--threads", threads, "worker threads for sweeps");
  };

  for (const char* name : {"dispersion", "propagator", "sumrules", "green",
                           "hopfield", "quasimode", "evolve"})
    add_common(app.add_subcommand(name));
  app.get_subcommand("sumrules")
      ->add_option("--roots", roots_file, "root table JSON (overrides solver)");
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_flag("--quick", quick, "fast subset only");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(std::max(threads, 1));

  try {
    if (app.got_subcommand("dispersion")) return cmd_dispersion(scenario, out_dir);
    if (app.got_subcommand("propagator")) return cmd_propagator(scenario, out_dir);
    if (app.got_subcommand("sumrules"))
      return cmd_sumrules(scenario, out_dir, roots_file);
    if (app.got_subcommand("green")) return cmd_green(scenario, out_dir);
    if (app.got_subcommand("hopfield")) return cmd_hopfield(scenario, out_dir);
    if (app.got_subcommand("quasimode")) return cmd_quasimode(scenario, out_dir);
    if (app.got_subcommand("evolve")) return cmd_evolve(scenario, out_dir);
    if (app.got_subcommand("verify")) return cmd_verify(quick);
  } catch (const tolerance_failure& f) {
    std::cerr << f.detail.dump() << "\n";
    return 2;
  } catch (const p::validation_error& e) {
    std::cerr << json{{"error", "validation"}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    // numerical failures from the library (root counts, poles, stability)
    std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  }
  return 1;
}
