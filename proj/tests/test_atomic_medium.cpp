#include <doctest.h>

#include <cmath>
#include <random>

#include "nanofiber/atomic_medium.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/inference.hpp"

using namespace nanofiber;

namespace {

LineSystem single_line(double phi_max) {
  LineSystem sys = LineSystem::cesium_d2(phi_max).with_lines({5});
  return sys;
}

}  // namespace

TEST_CASE("single line peaks at +phi_max one half-linewidth below resonance") {
  const LineSystem sys = single_line(2.3);
  // normalized detuning -1 <=> nu = -gamma/2
  const double nu = -0.5 * sys.gamma_mhz;
  CHECK(dispersive_phase(sys, nu) == doctest::Approx(2.3).epsilon(1e-12));
  CHECK(dispersive_phase(sys, -nu) == doctest::Approx(-2.3).epsilon(1e-12));
}

TEST_CASE("phase vanishes in the far wing") {
  const LineSystem sys = LineSystem::cesium_d2(5.0);
  CHECK(std::abs(dispersive_phase(sys, 1e6)) < 1e-3 * sys.phi_max);
  CHECK(std::abs(dispersive_phase(sys, -1e6)) < 1e-3 * sys.phi_max);
}

TEST_CASE("three-line zero crossing sits between F'=4 and F'=5") {
  const LineSystem sys = LineSystem::cesium_d2(6.98);
  const double crossing = model_zero_crossing(sys, -230.0, -40.0);
  // Root of the three-line model; the measured signal crosses near -180 MHz.
  CHECK(crossing > -187.0);
  CHECK(crossing < -157.0);
  CHECK(crossing == doctest::Approx(-164.68).epsilon(0.01));
}

TEST_CASE("optical density examples") {
  const LineSystem sys = single_line(6.98);
  CHECK(optical_density(sys, 0.0) == doctest::Approx(4.0 * 6.98).epsilon(1e-12));
  // Half width: OD drops to half at one linewidth-normalized unit.
  CHECK(optical_density(sys, 0.5 * sys.gamma_mhz) ==
        doctest::Approx(2.0 * 6.98).epsilon(1e-12));
  CHECK(optical_density(sys, -0.5 * sys.gamma_mhz) ==
        doctest::Approx(2.0 * 6.98).epsilon(1e-12));
  CHECK(sys.od_max() == doctest::Approx(27.92).epsilon(1e-12));
}

TEST_CASE("dispersive term equals -Delta times the absorptive term per line") {
  // Exact algebraic pairing of the two Lorentzian quadratures.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> detuning(-600.0, 300.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double nu = detuning(rng);
    for (int f : {3, 4, 5}) {
      const LineSystem line = LineSystem::cesium_d2(1.7).with_lines({f});
      const double delta =
          2.0 * (nu - line.lines[0].frequency_offset_mhz) / line.gamma_mhz;
      CHECK(dispersive_phase(line, nu) ==
            doctest::Approx(-delta * optical_density(line, nu) / 2.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("single-line symmetry about the center") {
  const LineSystem sys = single_line(3.1);
  for (const double x : {0.7, 2.0, 11.0, 40.0}) {
    CHECK(dispersive_phase(sys, x) ==
          doctest::Approx(-dispersive_phase(sys, -x)).epsilon(1e-12));
    CHECK(optical_density(sys, x) ==
          doctest::Approx(optical_density(sys, -x)).epsilon(1e-12));
  }
}

TEST_CASE("phase and optical density are linear in the atom number") {
  const double eta = 0.027356;
  const LineSystem one = LineSystem::cesium_d2(atom_number_to_phi_max(500, eta));
  const LineSystem two = LineSystem::cesium_d2(atom_number_to_phi_max(1000, eta));
  for (const double nu : {-120.0, 30.0, 165.0}) {
    CHECK(2.0 * dispersive_phase(one, nu) ==
          doctest::Approx(dispersive_phase(two, nu)).epsilon(1e-12));
    CHECK(2.0 * optical_density(one, nu) ==
          doctest::Approx(optical_density(two, nu)).epsilon(1e-12));
  }
}

TEST_CASE("response ties the two eigenmodes through the asymmetry") {
  const LineSystem sys = LineSystem::cesium_d2(6.98);
  const OpticalResponse far = response_at(sys, 5000.0, 2.8);
  CHECK(far.phi_par / far.phi_perp == doctest::Approx(2.8).epsilon(1e-12));
  const OpticalResponse near = response_at(sys, 20.0, 2.8);
  CHECK(near.phi_par / near.phi_perp == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(std::log(near.t_perp) / std::log(near.t_par) ==
        doctest::Approx(1.0 / 2.8).epsilon(1e-12));
  CHECK(near.phase_difference() ==
        doctest::Approx(near.phi_par * (1.0 - 1.0 / 2.8)).epsilon(1e-12));

  // Decoupled perp mode in the limit of extreme asymmetry.
  const OpticalResponse decoupled = response_at(sys, 20.0, 1e12);
  CHECK(std::abs(decoupled.phi_perp) < 1e-11);
  CHECK(decoupled.t_perp == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("atom number to phi_max") {
  CHECK(atom_number_to_phi_max(1021, 0.027356) == doctest::Approx(6.98).epsilon(1e-3));
  CHECK(atom_number_to_phi_max(0, 0.027356) == 0.0);
  CHECK(atom_number_to_phi_max(2000, 0.02) ==
        doctest::Approx(2.0 * atom_number_to_phi_max(1000, 0.02)).epsilon(1e-14));
  CHECK_THROWS_AS(atom_number_to_phi_max(-1, 0.027), std::invalid_argument);
  CHECK_THROWS_AS(atom_number_to_phi_max(10, 0.0), std::invalid_argument);
}

TEST_CASE("per-atom slope constants from the reference calibration") {
  const double phi_max = 6.98;
  const double slope_par =
      phi_max * constants::natural_linewidth_mhz / 1021.0 * 1e3;  // mrad MHz
  CHECK(slope_par == doctest::Approx(35.55).epsilon(0.002));
  CHECK(slope_par > 34.0);
  CHECK(slope_par < 38.0);
  const double slope_dphi = slope_par * (1.0 - 1.0 / 2.8);
  CHECK(slope_dphi == doctest::Approx(22.85).epsilon(0.002));
  CHECK(slope_dphi > 22.0);
  CHECK(slope_dphi < 24.0);
}

TEST_CASE("scattering rate magnitude and scalings") {
  const LineSystem sys = LineSystem::cesium_d2(1.0);
  const double area = 3.565e-12;  // m^2, solved mode at the trap site
  const double sigma5 = 0.027356 * area;
  const double rate = scattering_rate(sys, 5e-12, 165.0, area, 2.8, sigma5,
                                      constants::probe_wavelength);
  // The paper-style estimate is ~50 Hz; the weighting convention is only
  // fixed up to the mode split, so accept a factor of 4.
  CHECK(rate > 50.0 / 4.0);
  CHECK(rate < 50.0 * 4.0);

  CHECK(scattering_rate(sys, 0.0, 165.0, area, 2.8, sigma5,
                        constants::probe_wavelength) == 0.0);
  CHECK_THROWS_AS(scattering_rate(sys, -1e-12, 165.0, area, 2.8, sigma5,
                                  constants::probe_wavelength),
                  std::invalid_argument);

  // Far-wing 1/delta^2 scaling on a single line.
  const LineSystem one = single_line(1.0);
  const double r1 = scattering_rate(one, 5e-12, 2000.0, area, 2.8, sigma5,
                                    constants::probe_wavelength);
  const double r2 = scattering_rate(one, 5e-12, 4000.0, area, 2.8, sigma5,
                                    constants::probe_wavelength);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("line system validation") {
  LineSystem sys = LineSystem::cesium_d2(1.0);
  CHECK_NOTHROW(sys.validate());
  CHECK(sys.with_lines({4, 5}).lines.size() == 2);
  CHECK(sys.with_lines({5}).lines.size() == 1);

  LineSystem bad = sys;
  bad.lines[0].strength_ratio = 0.3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  LineSystem swapped = sys;
  std::swap(swapped.lines[0], swapped.lines[1]);
  CHECK_THROWS_AS(swapped.validate(), std::invalid_argument);

  LineSystem negative = sys;
  negative.gamma_mhz = -1.0;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}
