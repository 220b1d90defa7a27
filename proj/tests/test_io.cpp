#include <doctest.h>

#include <cmath>
#include <random>

#include "nanofiber/inference.hpp"
#include "nanofiber/io.hpp"
#include "nanofiber/measurement_sim.hpp"

using namespace nanofiber;

TEST_CASE("shortest round-trip double formatting") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-18, 6);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = mantissa(rng) * std::pow(10.0, exponent(rng));
    const std::string text = io::format_double(x);
    CHECK(std::stod(text) == x);
  }
}

TEST_CASE("scan CSV round trip is byte-identical") {
  NoiseModel noise;
  noise.seed = 8;
  const SpectrumScan scan =
      simulate_scan(321.0, SimCalibration{}, ProbeConfig::scan_defaults(), noise);
  const std::string csv = io::to_csv(scan);
  const SpectrumScan parsed = io::scan_from_csv(csv);
  CHECK(io::to_csv(parsed) == csv);
  CHECK(parsed.size() == scan.size());
  CHECK_FALSE(parsed.has_noise_metadata);
}

TEST_CASE("metadata restores the full fit context") {
  NoiseModel noise;
  noise.seed = 9;
  SimCalibration cal;
  cal.lines = LineSystem::cesium_d2(0.0, -4.6);
  const SpectrumScan scan =
      simulate_scan(1021.0, cal, ProbeConfig::scan_defaults(), noise);

  SpectrumScan restored = io::scan_from_csv(io::to_csv(scan));
  io::apply_metadata(restored, io::metadata_json(scan));
  CHECK(restored.n_atoms == scan.n_atoms);
  CHECK(restored.noise.seed == scan.noise.seed);
  CHECK(restored.probe.averages == scan.probe.averages);
  CHECK(restored.calibration.lines.lines.size() == 3);

  // Weighted fits from the restored record match the in-memory ones.
  const FitResult direct = fit_spectrum(scan, SpectrumFitConfig{});
  const FitResult from_file = fit_spectrum(restored, SpectrumFitConfig{});
  CHECK(from_file.parameter("phi_max") ==
        doctest::Approx(direct.parameter("phi_max")).epsilon(1e-12));
  CHECK(from_file.uncertainty("phi_max") ==
        doctest::Approx(direct.uncertainty("phi_max")).epsilon(1e-9));
}

TEST_CASE("trace CSV carries both channels through blank cells") {
  NoiseModel noise;
  noise.seed = 10;
  ProbeConfig probe = ProbeConfig::fixed_detuning(165.0, 0.5e-3);
  probe.averages = 32;
  const DecayTrace trace =
      simulate_decay(600.0, 0.048, SimCalibration{}, probe, noise, DecayConfig{});
  const std::string csv = io::to_csv(trace);
  const io::TraceChannels channels = io::trace_from_csv(csv);
  CHECK(channels.cont_t_s.size() == trace.cont_t_s.size());
  CHECK(channels.pulsed_t_s.size() == trace.pulsed_t_s.size());
  CHECK((channels.cont_atoms - trace.cont_atoms).abs().maxCoeff() == 0.0);
  CHECK((channels.pulsed_atoms - trace.pulsed_atoms).abs().maxCoeff() == 0.0);

  // Times stay sorted after the two channels are merged.
  std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "t_s,dphi_rad,atoms_cont,atoms_pulsed");

  // Read -> write is byte-identical for traces as well.
  CHECK(io::to_csv(channels) == csv);
}

TEST_CASE("fit result JSON carries the documented fields") {
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(30, 0.0, 0.1);
  const Eigen::ArrayXd atoms = 400.0 * (-t / 0.048).exp();
  const FitResult fit = fit_decay(t, atoms);
  const nlohmann::json j = io::to_json(fit);
  CHECK(j.contains("parameters"));
  CHECK(j.contains("uncertainties"));
  CHECK(j.contains("residual_rms"));
  CHECK(j.contains("converged"));
  CHECK(j.contains("iterations"));
  CHECK(j.contains("mask_used"));
  CHECK(j["parameters"].contains("tau_s"));
  CHECK(j["parameters"]["tau_s"].get<double>() == doctest::Approx(0.048));
}

TEST_CASE("malformed CSV inputs are rejected") {
  CHECK_THROWS_AS(io::scan_from_csv("wrong,header\n"), std::invalid_argument);
  CHECK_THROWS_AS(
      io::scan_from_csv("detuning_mhz,p_plus_w,p_minus_w,s3_norm\n1,2,3\n"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      io::scan_from_csv("detuning_mhz,p_plus_w,p_minus_w,s3_norm\n1,x,3,4\n"),
      std::invalid_argument);
  CHECK_THROWS_AS(io::trace_from_csv("t_s\n"), std::invalid_argument);
}
