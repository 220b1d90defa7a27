#include "nanofiber/measurement_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "nanofiber/polarimetry.hpp"
#include "nanofiber/random.hpp"

namespace nanofiber {

namespace {

constexpr std::uint64_t kScanStream = 1;
constexpr std::uint64_t kDecayContinuousStream = 2;
constexpr std::uint64_t kDecayPulsedStream = 3;

struct DetectedPair {
  double p_plus, p_minus;
};

// Ideal detected APD powers (QE applied) for one detuning.
DetectedPair ideal_powers(double phi_max, const SimCalibration& cal,
                          const ProbeConfig& probe, double detuning_mhz,
                          double quantum_efficiency) {
  LineSystem sys = cal.lines;
  sys.phi_max = phi_max;
  OpticalResponse resp = response_at(sys, detuning_mhz, cal.rho);
  resp.phi_par += probe.parasitic_phase_rad;  // uncompensated birefringence
  const JonesState out = propagate(JonesState::balanced(probe.power_w), resp);
  const std::complex<double> i(0.0, 1.0);
  const double p_plus = 0.5 * std::norm(out.par() + i * out.perp());
  const double p_minus = 0.5 * std::norm(out.par() - i * out.perp());
  return {quantum_efficiency * p_plus, quantum_efficiency * p_minus};
}

// Poisson counter that tolerates a dark port (zero mean).
long poisson_draw(double mean, std::mt19937_64& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long> poisson(mean);
  return poisson(rng);
}

// One averaged (p+, p-) sample: Poisson photon counting per repetition plus
// additive Gaussian detector noise on the measured power.
DetectedPair sample_powers(const DetectedPair& ideal, const ProbeConfig& probe,
                           const NoiseModel& noise, std::mt19937_64& rng) {
  const bool detector = noise.detector_noise_rms_w > 0.0;
  if (!noise.shot_noise && !detector) return ideal;
  const double energy = constants::photon_energy(probe.wavelength_m);
  const double power_per_count = energy / probe.dwell_s;
  const double mean_plus = ideal.p_plus / power_per_count;
  const double mean_minus = ideal.p_minus / power_per_count;
  std::normal_distribution<double> gauss(0.0, detector ? noise.detector_noise_rms_w : 1.0);
  double acc_plus = 0.0, acc_minus = 0.0;
  for (int rep = 0; rep < probe.averages; ++rep) {
    double p = noise.shot_noise ? poisson_draw(mean_plus, rng) * power_per_count
                                : ideal.p_plus;
    double m = noise.shot_noise ? poisson_draw(mean_minus, rng) * power_per_count
                                : ideal.p_minus;
    if (detector) {
      p += gauss(rng);
      m += gauss(rng);
    }
    acc_plus += p;
    acc_minus += m;
  }
  return {acc_plus / probe.averages, acc_minus / probe.averages};
}

double ratio_s3(const DetectedPair& p) {
  const double total = p.p_plus + p.p_minus;
  return total > 0.0 ? (p.p_plus - p.p_minus) / total : 0.0;
}

}  // namespace

void ProbeConfig::validate() const {
  if (power_w < 0.0) throw std::invalid_argument("probe power must be >= 0");
  if (detuning_grid_mhz.size() == 0)
    throw std::invalid_argument("detuning grid is empty");
  for (Eigen::Index i = 1; i < detuning_grid_mhz.size(); ++i)
    if (!(detuning_grid_mhz(i) > detuning_grid_mhz(i - 1)))
      throw std::invalid_argument("detuning grid must be strictly increasing");
  if (!(dwell_s > 0.0)) throw std::invalid_argument("dwell time must be positive");
  if (averages < 1) throw std::invalid_argument("averages must be >= 1");
}

ProbeConfig ProbeConfig::scan_defaults() {
  ProbeConfig p;
  p.detuning_grid_mhz = Eigen::ArrayXd::LinSpaced(451, -250.0, 200.0);
  p.dwell_s = constants::scan_duration / static_cast<double>(p.detuning_grid_mhz.size());
  return p;
}

ProbeConfig ProbeConfig::fixed_detuning(double detuning_mhz, double dwell_s) {
  ProbeConfig p;
  p.detuning_grid_mhz = Eigen::ArrayXd::Constant(1, detuning_mhz);
  p.dwell_s = dwell_s;
  return p;
}

void NoiseModel::validate() const {
  if (detector_noise_rms_w < 0.0)
    throw std::invalid_argument("detector noise rms must be >= 0");
  if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
    throw std::invalid_argument("quantum efficiency must be in (0, 1]");
}

void DecayConfig::validate() const {
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  if (extra_loss_rate_per_s < 0.0)
    throw std::invalid_argument("extra loss rate must be >= 0");
  if (pulsed_delays < 2) throw std::invalid_argument("need at least 2 pulsed delays");
  if (pulsed_averages < 1) throw std::invalid_argument("pulsed averages must be >= 1");
  if (!(pulsed_photons_per_atom > 0.0))
    throw std::invalid_argument("pulsed photons per atom must be positive");
  if (!(pulsed_scale_factor > 0.0))
    throw std::invalid_argument("pulsed scale factor must be positive");
}

SpectrumScan simulate_scan(double n_atoms, const SimCalibration& calibration,
                           const ProbeConfig& probe, const NoiseModel& noise) {
  probe.validate();
  noise.validate();
  if (n_atoms < 0.0) throw std::invalid_argument("atom number must be >= 0");

  const double phi_max = atom_number_to_phi_max(n_atoms, calibration.eta);
  const Eigen::Index n = probe.detuning_grid_mhz.size();

  SpectrumScan scan;
  scan.detuning_mhz = probe.detuning_grid_mhz;
  scan.p_plus_w.resize(n);
  scan.p_minus_w.resize(n);
  scan.s3_norm.resize(n);
  scan.n_atoms = n_atoms;
  scan.calibration = calibration;
  scan.probe = probe;
  scan.noise = noise;

  for (Eigen::Index i = 0; i < n; ++i) {
    const DetectedPair ideal = ideal_powers(phi_max, calibration, probe,
                                            probe.detuning_grid_mhz(i),
                                            noise.quantum_efficiency);
    auto rng = engine_for(noise.seed, kScanStream, static_cast<std::uint64_t>(i));
    const DetectedPair sampled = sample_powers(ideal, probe, noise, rng);
    scan.p_plus_w(i) = sampled.p_plus;
    scan.p_minus_w(i) = sampled.p_minus;
    scan.s3_norm(i) = ratio_s3(sampled);
  }
  return scan;
}

DecayTrace simulate_decay(double n0, double tau_s, const SimCalibration& calibration,
                          const ProbeConfig& probe, const NoiseModel& noise,
                          const DecayConfig& config) {
  probe.validate();
  noise.validate();
  config.validate();
  if (!(tau_s > 0.0)) throw std::invalid_argument("decay constant must be positive");
  if (n0 < 0.0) throw std::invalid_argument("initial atom number must be >= 0");
  if (probe.detuning_grid_mhz.size() != 1)
    throw std::invalid_argument("decay probe needs a single fixed detuning");

  const double detuning = probe.detuning_grid_mhz(0);
  const double slope = calibration.dphi_slope_rad_mhz_per_atom();

  DecayTrace trace;
  trace.n0 = n0;
  trace.tau_s = tau_s;
  trace.config = config;
  trace.calibration = calibration;
  trace.probe = probe;
  trace.noise = noise;

  // Continuous channel: one phase sample every dwell interval; the probe adds
  // the optional extra loss to the actual atom number it measures.
  const double cont_rate = 1.0 / tau_s + config.extra_loss_rate_per_s;
  const auto n_samples = static_cast<Eigen::Index>(config.duration_s / probe.dwell_s);
  if (n_samples < 2) throw std::invalid_argument("duration too short for the dwell time");
  trace.cont_t_s.resize(n_samples);
  trace.cont_dphi_rad.resize(n_samples);
  trace.cont_atoms.resize(n_samples);
  for (Eigen::Index k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) * probe.dwell_s;
    const double n_t = n0 * std::exp(-t * cont_rate);
    const DetectedPair ideal = ideal_powers(atom_number_to_phi_max(n_t, calibration.eta),
                                            calibration, probe, detuning,
                                            noise.quantum_efficiency);
    auto rng = engine_for(noise.seed, kDecayContinuousStream,
                          static_cast<std::uint64_t>(k));
    const double s3 = ratio_s3(sample_powers(ideal, probe, noise, rng));
    const double dphi = std::asin(std::clamp(s3, -1.0, 1.0));
    trace.cont_t_s(k) = t;
    trace.cont_dphi_rad(k) = dphi;
    trace.cont_atoms(k) = -dphi * detuning / slope;
  }

  // Pulsed channel: resonant absorption pulses at linearly spaced delays,
  // scaled by the saturation calibration. Shot noise on the detected counts.
  trace.pulsed_t_s.resize(config.pulsed_delays);
  trace.pulsed_transmission.resize(config.pulsed_delays);
  trace.pulsed_atoms.resize(config.pulsed_delays);
  for (int j = 0; j < config.pulsed_delays; ++j) {
    const double t = config.duration_s * j / (config.pulsed_delays - 1);
    const double n_t = n0 * std::exp(-t / tau_s);
    const double expected_counts = config.pulsed_photons_per_atom * n_t;
    auto rng = engine_for(noise.seed, kDecayPulsedStream, static_cast<std::uint64_t>(j));
    double mean_counts = expected_counts;
    if (noise.shot_noise) {
      long total = 0;
      for (int rep = 0; rep < config.pulsed_averages; ++rep)
        total += poisson_draw(expected_counts, rng);
      mean_counts = static_cast<double>(total) / config.pulsed_averages;
    }
    trace.pulsed_t_s(j) = t;
    trace.pulsed_transmission(j) = std::exp(-calibration.eta * n_t);
    trace.pulsed_atoms(j) =
        mean_counts / (config.pulsed_photons_per_atom * config.pulsed_scale_factor);
  }
  return trace;
}

double sensitivity_estimate(double power_w, double detuning_mhz,
                            double dphi_slope_rad_mhz_per_atom,
                            double wavelength_m) {
  if (!(power_w > 0.0)) throw std::invalid_argument("probe power must be positive");
  if (detuning_mhz == 0.0) throw std::invalid_argument("detuning must be nonzero");
  const double flux = power_w / constants::photon_energy(wavelength_m);
  const double phase_noise_per_sqrt_hz = 1.0 / std::sqrt(flux);
  const double dphi_per_atom = dphi_slope_rad_mhz_per_atom / std::abs(detuning_mhz);
  return phase_noise_per_sqrt_hz / dphi_per_atom;
}

double minimum_detectable_atoms(double sensitivity_per_sqrt_hz, double integration_s) {
  if (!(integration_s > 0.0))
    throw std::invalid_argument("integration time must be positive");
  return sensitivity_per_sqrt_hz / std::sqrt(integration_s);
}

double analytic_s3_variance(double p_plus_w, double p_minus_w,
                            const ProbeConfig& probe, const NoiseModel& noise) {
  const double energy = constants::photon_energy(probe.wavelength_m);
  const double power_per_count = energy / probe.dwell_s;
  // Per-repetition power variances: Poisson counting plus detector noise.
  const double var_plus = (noise.shot_noise ? p_plus_w * power_per_count : 0.0) +
                          noise.detector_noise_rms_w * noise.detector_noise_rms_w;
  const double var_minus = (noise.shot_noise ? p_minus_w * power_per_count : 0.0) +
                           noise.detector_noise_rms_w * noise.detector_noise_rms_w;
  const double total = p_plus_w + p_minus_w;
  const double s = (p_plus_w - p_minus_w) / total;
  const double var = ((var_plus + var_minus) * (1.0 + s * s) -
                      2.0 * s * (var_plus - var_minus)) /
                     (total * total);
  return var / probe.averages;
}

}  // namespace nanofiber
