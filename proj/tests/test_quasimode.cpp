#include <catch2/catch_amalgamated.hpp>

#include "polariton/hopfield.hpp"
#include "polariton/quasimode.hpp"

using namespace polariton;

namespace {

// analytic dOmega_-^2/domega_alpha^2 of the closed-form Hopfield branch,
// via a centered finite difference of the closed form (independent oracle)
double hopfield_branch_derivative_fd(double w0, double wp, double wa, int branch) {
  const HopfieldMedium m(w0, wp);
  const auto f = [&](double x) {
    const auto fr = hopfield_frequencies(std::sqrt(x), m);
    const double W = branch > 0 ? fr.Omega_plus : fr.Omega_minus;
    return W * W;
  };
  const double x = wa * wa, h = 1e-6;
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("group velocity factor") {
  SECTION("vacuum") {
    const auto g = group_velocity_factor(Medium{}, 1.0);
    CHECK(g.dOmega2_domega_alpha2 == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(g.brillouin == Catch::Approx(2.0).epsilon(1e-14));
  }

  SECTION("Hopfield branch derivative matches the closed-form oracle") {
    const Medium med({{1.0, 1.0, 1e-7}});
    const HopfieldMedium hm(1.0, 1.0);
    const auto fr = hopfield_frequencies(1.0, hm);
    const auto g = group_velocity_factor(med, fr.Omega_minus);
    CHECK(g.dOmega2_domega_alpha2 ==
          Catch::Approx(hopfield_branch_derivative_fd(1.0, 1.0, 1.0, -1))
              .epsilon(1e-8));
  }

  SECTION("Brillouin identity across a sweep") {
    const Medium med({{1.0, 1.0, 1e-4}});
    for (double W = 0.1; W < 0.95; W += 0.05) {
      const auto g = group_velocity_factor(med, W);
      CHECK(std::abs(g.brillouin - g.two_n_over_vg) < 1e-10);
    }
  }
}

TEST_CASE("transverse commutator integral") {
  SECTION("near-vacuum limit -> Omega/2") {
    const Medium med({{1e-3, 10.0, 1e-3}});  // eps ~ 1 near W = 1
    const double wa = 1.0;
    // dispersion root is essentially at wa
    const auto win = default_window(med, wa);
    const double I = transverse_commutator_integral(med, wa, win);
    CHECK(I == Catch::Approx(wa / 2.0).epsilon(1e-3));
  }

  SECTION("Hopfield lower branch at weak loss") {
    const Medium med({{1.0, 1.0, 1e-4}});
    const HopfieldMedium hm(1.0, 1.0);
    const auto fr = hopfield_frequencies(1.0, hm);
    const auto win = default_window(med, fr.Omega_minus);
    const double I = transverse_commutator_integral(med, 1.0, win);
    const double target =
        0.5 * fr.Omega_minus * hopfield_branch_derivative_fd(1.0, 1.0, 1.0, -1);
    CHECK(I == Catch::Approx(target).epsilon(0.01));

    // window-width insensitivity
    FrequencyWindow wide = win;
    wide.width *= 2.0;
    const double I2 = transverse_commutator_integral(med, 1.0, wide);
    CHECK(std::abs(I2 - I) < 1e-3 * std::abs(I));
  }

  SECTION("weak-loss convergence O(gamma)") {
    const HopfieldMedium hm(1.0, 1.0);
    const auto fr = hopfield_frequencies(1.0, hm);
    const double target =
        0.5 * fr.Omega_minus * hopfield_branch_derivative_fd(1.0, 1.0, 1.0, -1);
    // fixed physical window: the hard-cutoff bias then shrinks with gamma
    const auto win = default_window(Medium({{1.0, 1.0, 1e-3}}), fr.Omega_minus);
    double prev = 1e9;
    for (double g : {1e-3, 1e-4, 1e-5}) {
      const Medium med({{1.0, 1.0, g}});
      const double err =
          std::abs(transverse_commutator_integral(med, 1.0, win) - target);
      CHECK(err < prev);
      prev = err;
    }
  }

  SECTION("positivity") {
    const Medium med({{1.0, 1.0, 1e-3}});
    const auto win = default_window(med, 0.618);
    CHECK(transverse_commutator_integral(med, 1.0, win) > 0.0);
  }
}

TEST_CASE("longitudinal commutator integral") {
  const Medium med({{1.0, 1.0, 1e-4}});
  const double wL = std::sqrt(2.0);
  const auto win = default_window(med, wL);
  const double I = longitudinal_commutator_integral(med, win);
  const double M = 2.0 * std::sqrt(2.0);  // d eps'/dw at wL for w0 = wp = 1
  CHECK(I == Catch::Approx(1.0 / M).epsilon(0.01));

  // halving gamma barely moves the integral
  const Medium med2({{1.0, 1.0, 5e-5}});
  const double I2 = longitudinal_commutator_integral(med2, default_window(med2, wL));
  CHECK(std::abs(I2 - I) < 5e-3 * std::abs(I));

  // off any eps' zero the integral is negligible
  const double off = longitudinal_commutator_integral(
      med, FrequencyWindow{2.5, 0.01, WindowShape::hard_indicator});
  CHECK(off < 1e-3 * I);
}

TEST_CASE("quasimode energy") {
  CHECK(quasimode_energy({}) == 0.0);
  CHECK(quasimode_energy({{1.7, 1.0}}) == 1.7);
  CHECK_THROWS_AS(quasimode_energy({{1.0, -0.5}}), validation_error);

  // cross-module oracle: ladder populations reproduce the Hopfield H_raw
  const HopfieldMedium hm(1.0, 1.0);
  const double wa = 1.1;
  const HopfieldModeState s{0.6, -0.4, 0.2, 0.3};
  const auto fr = hopfield_frequencies(wa, hm);
  const auto amp = hopfield_transform(s, wa, hm);
  const double fp = std::abs(amp.phi_plus) * ladder_rescale(wa, hm, fr.Omega_plus);
  const double fm = std::abs(amp.phi_minus) * ladder_rescale(wa, hm, fr.Omega_minus);
  const double e = quasimode_energy({{fr.Omega_plus, fp * fp}, {fr.Omega_minus, fm * fm}});
  CHECK(e == Catch::Approx(mode_energy_raw(s, hm)).epsilon(1e-6));
}
