#include <doctest.h>

#include <cmath>
#include <random>

#include "nanofiber/atomic_medium.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/polarimetry.hpp"

using namespace nanofiber;

namespace {

// Independent closed form for the readout, used as the oracle against the
// projection-based implementation.
double s3_closed_form(const OpticalResponse& r) {
  return 2.0 * r.t_par * r.t_perp / (r.t_par * r.t_par + r.t_perp * r.t_perp) *
         std::sin(r.phi_par - r.phi_perp);
}

OpticalResponse random_response(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> trans(0.05, 1.0);
  std::uniform_real_distribution<double> phase(-1.5, 1.5);
  OpticalResponse r;
  r.t_par = trans(rng);
  r.t_perp = trans(rng);
  r.phi_par = phase(rng);
  r.phi_perp = phase(rng);
  return r;
}

}  // namespace

TEST_CASE("identity response leaves the state unchanged") {
  const JonesState in = JonesState::balanced(5e-12);
  const JonesState out = propagate(in, OpticalResponse{});
  CHECK(out.par() == in.par());
  CHECK(out.perp() == in.perp());
  CHECK(out.power() == doctest::Approx(in.power()).epsilon(1e-15));
}

TEST_CASE("quarter-wave phase difference gives circular light") {
  OpticalResponse r;
  r.phi_par = constants::pi / 2.0;
  const JonesState out = propagate(JonesState::balanced(1e-12), r);
  CHECK(stokes_s3(out) == doctest::Approx(1.0).epsilon(1e-12));
  r.phi_par = -constants::pi / 2.0;
  CHECK(stokes_s3(propagate(JonesState::balanced(1e-12), r)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("reference ensemble at +30 MHz shifts the par mode beyond 1 rad") {
  const LineSystem sys = LineSystem::cesium_d2(atom_number_to_phi_max(1021, 0.027356));
  const OpticalResponse r = response_at(sys, 30.0, 2.8);
  CHECK(std::abs(r.phi_par) > 1.0);
}

TEST_CASE("no atoms means S3/S0 = 0") {
  const JonesState out = propagate(JonesState::balanced(5e-12), OpticalResponse{});
  CHECK(stokes_s3(out) == doctest::Approx(0.0));
}

TEST_CASE("equal transmissions turn S3/S0 into sin(dphi)") {
  OpticalResponse r;
  r.t_par = r.t_perp = 0.9;
  r.phi_par = constants::pi / 6.0;
  CHECK(stokes_s3(propagate(JonesState::balanced(3e-12), r)) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("quarter-wave readout at 25% absorption shows the 0.9957 prefactor") {
  OpticalResponse r;
  r.t_par = std::sqrt(0.75);
  r.t_perp = std::pow(r.t_par, 1.0 / 2.8);
  r.phi_par = constants::pi / 2.0;
  CHECK(stokes_s3(propagate(JonesState::balanced(1e-12), r)) ==
        doctest::Approx(0.9957).epsilon(1e-4));
}

TEST_CASE("projection readout equals the closed form") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const OpticalResponse r = random_response(rng);
    const JonesState out = propagate(JonesState::balanced(5e-12), r);
    CHECK(stokes_s3(out) == doctest::Approx(s3_closed_form(r)).epsilon(1e-12));
  }
}

TEST_CASE("propagation conserves the balanced-input energy split") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const OpticalResponse r = random_response(rng);
    const double power_in = 5e-12;
    const JonesState out = propagate(JonesState::balanced(power_in), r);
    const double expected =
        power_in * (r.t_par * r.t_par + r.t_perp * r.t_perp) / 2.0;
    CHECK(out.power() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(out.power() <= power_in * (1.0 + 1e-12));
  }
}

TEST_CASE("pure states stay pure through the chain") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const OpticalResponse r = random_response(rng);
    const StokesVector s = stokes_vector(propagate(JonesState::balanced(2e-12), r));
    CHECK(s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3 ==
          doctest::Approx(s.s0 * s.s0).epsilon(1e-12));
  }
}

TEST_CASE("zero-power state has no Stokes ratio") {
  JonesState dark;
  dark.amplitudes.setZero();
  CHECK_THROWS_AS(stokes_s3(dark), std::invalid_argument);
}

TEST_CASE("phase extraction inverts the lossless forward model") {
  for (const double dphi : {-1.5, -0.7, -0.05, 0.0, 0.3, 1.2}) {
    OpticalResponse r;
    r.phi_par = dphi;  // t = 1, phi_perp = 0
    const double s3 = stokes_s3(propagate(JonesState::balanced(1e-12), r));
    const double factor = 1.0 / (1.0 - 1.0 / 2.8);
    // extract_phi_par maps dphi back through the asymmetry factor.
    CHECK(extract_phi_par(s3, 2.8) == doctest::Approx(factor * dphi).epsilon(1e-12));
  }
}

TEST_CASE("extraction constants and domain") {
  CHECK(extract_phi_par(0.0, 2.8) == 0.0);
  CHECK(extract_phi_par(1.0, 2.8) ==
        doctest::Approx(2.8 / 1.8 * constants::pi / 2.0).epsilon(1e-12));
  CHECK(extract_phi_par(1.0, 2.8) == doctest::Approx(2.4434).epsilon(1e-4));
  CHECK_THROWS_AS(extract_phi_par(1.0001, 2.8), std::domain_error);
  CHECK_THROWS_AS(extract_phi_par(0.5, 0.9), std::invalid_argument);
}

TEST_CASE("round trip recovers phi_par to 1% inside the validity region") {
  const LineSystem sys = LineSystem::cesium_d2(6.98);
  for (double nu = -240.0; nu <= 200.0; nu += 1.0) {
    const OpticalResponse r = response_at(sys, nu, 2.8);
    if (r.t_par * r.t_par < 0.75) continue;
    if (std::abs(r.phase_difference()) >= constants::pi / 2.0) continue;
    const double s3 = stokes_s3(propagate(JonesState::balanced(5e-12), r));
    const double recovered = extract_phi_par(s3, 2.8);
    CAPTURE(nu);
    CHECK(std::abs(recovered - r.phi_par) < 0.01 * std::abs(r.phi_par) + 1e-12);
  }
}

TEST_CASE("prefactor error values and monotonicity") {
  CHECK(prefactor_error(1.0, 2.8) == doctest::Approx(0.0));
  const double at_75 = prefactor_error(std::sqrt(0.75), 2.8);
  CHECK(at_75 == doctest::Approx(0.00426).epsilon(0.02));
  CHECK(at_75 < 0.01);
  CHECK(prefactor_error(std::sqrt(0.5), 2.8) > at_75);

  double prev = prefactor_error(0.05, 2.8);
  for (double t = 0.1; t <= 1.0; t += 0.05) {
    const double err = prefactor_error(t, 2.8);
    CHECK(err < prev);
    prev = err;
  }
  CHECK_THROWS_AS(prefactor_error(0.0, 2.8), std::invalid_argument);
}
