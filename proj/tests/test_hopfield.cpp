#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "polariton/hopfield.hpp"

using namespace polariton;

namespace {

// classic RK4 on the 4x4 lossless mode system, used as the evolution oracle
HopfieldModeState evolve_mode(const HopfieldModeState& s0, double omega_alpha,
                              const HopfieldMedium& m, double T, double dt) {
  const Eigen::Matrix4d A = detail::hopfield_mode_matrix(omega_alpha, m);
  Eigen::Vector4d u;
  u << s0.e, s0.b, s0.p, s0.pdot;
  const auto n = static_cast<std::size_t>(std::ceil(T / dt));
  const double h = T / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d k1 = A * u;
    const Eigen::Vector4d k2 = A * (u + 0.5 * h * k1);
    const Eigen::Vector4d k3 = A * (u + 0.5 * h * k2);
    const Eigen::Vector4d k4 = A * (u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {u(0), u(1), u(2), u(3)};
}

}  // namespace

TEST_CASE("Hopfield frequencies: closed form vs secular residual") {
  const HopfieldMedium m(1.0, 1.0);
  const auto fr = hopfield_frequencies(1.0, m);
  CHECK(fr.Omega_plus * fr.Omega_plus ==
        Catch::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
  CHECK(fr.Omega_minus * fr.Omega_minus ==
        Catch::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-14));
  CHECK(fr.omega_L == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));

  // secular residual omega_alpha^2 = W^2 eps(W)
  for (double wa : {0.3, 1.0, 4.0}) {
    const auto f = hopfield_frequencies(wa, m);
    for (double W : {f.Omega_plus, f.Omega_minus}) {
      const double eps = 1.0 + 1.0 / (1.0 - W * W);
      CHECK(std::abs(wa * wa - W * W * eps) < 1e-12 * wa * wa);
    }
  }
}

TEST_CASE("Hopfield frequency limits and monotonicity") {
  const HopfieldMedium weak(1.0, 1e-6);
  const auto fr = hopfield_frequencies(2.0, weak);
  CHECK(fr.Omega_plus == Catch::Approx(2.0).epsilon(1e-9));
  CHECK(fr.Omega_minus == Catch::Approx(1.0).epsilon(1e-9));

  const HopfieldMedium m(1.0, 0.7);
  const auto big = hopfield_frequencies(1e4, m);
  CHECK(big.Omega_plus / 1e4 == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(big.Omega_minus == Catch::Approx(1.0).epsilon(1e-6));

  double prev_plus = 0.0;
  for (double wa = 0.1; wa < 5.0; wa += 0.1) {
    const auto f = hopfield_frequencies(wa, m);
    CHECK(f.Omega_plus > prev_plus);
    CHECK(f.Omega_minus < m.omega0);
    prev_plus = f.Omega_plus;
  }
}

TEST_CASE("transform round trip") {
  const HopfieldMedium m(1.0, 1.0);
  std::mt19937 rng(31415);
  std::uniform_real_distribution<double> u(-2.0, 2.0), uw(0.3, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double wa = uw(rng);
    const HopfieldModeState s{u(rng), u(rng), u(rng), u(rng)};
    const auto amp = hopfield_transform(s, wa, m);
    const auto back = hopfield_inverse(amp, wa, m);
    CHECK(std::abs(back.e - s.e) < 1e-12);
    CHECK(std::abs(back.b - s.b) < 1e-12);
    CHECK(std::abs(back.p - s.p) < 1e-12);
    CHECK(std::abs(back.pdot - s.pdot) < 1e-12);
  }

  const auto zero = hopfield_transform(HopfieldModeState{}, 1.0, m);
  CHECK(std::abs(zero.phi_plus) == 0.0);
  CHECK(std::abs(zero.phi_minus) == 0.0);
}

TEST_CASE("eigen-amplitudes evolve single-frequency") {
  const HopfieldMedium m(1.0, 1.0);
  const double wa = 1.0;
  const auto fr = hopfield_frequencies(wa, m);
  // pure phi_plus initial data
  const auto s0 = hopfield_inverse({complex(0.4, -0.3), complex(0.0, 0.0)}, wa, m);
  const double T = 3.7;
  const auto sT = evolve_mode(s0, wa, m, T, 1e-4);
  const auto ampT = hopfield_transform(sT, wa, m);
  const complex expected =
      complex(0.4, -0.3) * std::exp(complex(0.0, -fr.Omega_plus * T));
  CHECK(std::abs(ampT.phi_plus - expected) < 1e-8);
  CHECK(std::abs(ampT.phi_minus) < 1e-10);  // no spectral leakage
}

TEST_CASE("H_raw equals H_diag") {
  const HopfieldMedium m(1.0, 1.0);
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uw(0.3, 3.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<double, HopfieldModeState>> tr;
    for (int k = 0; k < 3; ++k)
      tr.push_back({uw(rng), {u(rng), u(rng), u(rng), u(rng)}});
    std::vector<LongitudinalModeState> lo = {{u(rng), u(rng)}};
    const auto cmp = hamiltonian_diagonal(tr, lo, m);
    CHECK(cmp.deviation < 1e-10);
  }

  // H_raw constant along a trajectory
  const HopfieldModeState s0{0.7, -0.2, 0.4, 0.1};
  const double e0 = mode_energy_raw(s0, m);
  const auto sT = evolve_mode(s0, 1.3, m, 5.0, 1e-4);
  CHECK(mode_energy_raw(sT, m) == Catch::Approx(e0).epsilon(1e-10));
}

TEST_CASE("vacuum limit: photon energy") {
  const HopfieldMedium m(1.0, 1e-5);
  // photon-like data: e, b only
  std::vector<std::pair<double, HopfieldModeState>> tr = {
      {2.0, {1.0, 0.0, 0.0, 0.0}}};
  const auto cmp = hamiltonian_diagonal(tr, {}, m);
  CHECK(cmp.raw == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(cmp.deviation < 1e-8);
}

TEST_CASE("longitudinal oscillation") {
  const HopfieldMedium m(1.0, 1.0);
  CHECK(longitudinal_oscillation(0.8, 0.3, m, 0.0) == 0.8);
  const double wL = std::sqrt(2.0);
  CHECK(std::abs(longitudinal_oscillation(0.8, 0.0, m, pi / (2.0 * wL))) < 1e-14);

  // ODE oracle: pddot = -wL^2 p
  double p = 0.8, pd = 0.3;
  const double dt = 1e-5, T = 4.0;
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  for (std::size_t i = 0; i < n; ++i) {
    // leapfrog
    pd -= 0.5 * dt * wL * wL * p;
    p += dt * pd;
    pd -= 0.5 * dt * wL * wL * p;
  }
  CHECK(longitudinal_oscillation(0.8, 0.3, m, T) == Catch::Approx(p).margin(1e-8));
}

TEST_CASE("ladder rescale reproduces the diagonal energy") {
  const HopfieldMedium m(1.0, 1.0);
  const double wa = 1.2;
  const auto fr = hopfield_frequencies(wa, m);
  const PolaritonAmplitudes amp{complex(0.3, 0.1), complex(-0.2, 0.5)};
  const double fp = std::abs(amp.phi_plus) * ladder_rescale(wa, m, fr.Omega_plus);
  const double fm = std::abs(amp.phi_minus) * ladder_rescale(wa, m, fr.Omega_minus);
  const double e_ladder = fr.Omega_plus * fp * fp + fr.Omega_minus * fm * fm;
  const double e_diag =
      hopfield_branch_coefficient(wa, m, fr.Omega_plus) * std::norm(amp.phi_plus) +
      hopfield_branch_coefficient(wa, m, fr.Omega_minus) * std::norm(amp.phi_minus);
  CHECK(e_ladder == Catch::Approx(e_diag).epsilon(1e-14));
}
