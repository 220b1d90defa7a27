// Synthetic experimental records: frequency scans with photon shot noise and
// detector noise, paired continuous-phase / pulsed-absorption decay traces,
// and closed-form shot-noise sensitivity estimates.
#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "nanofiber/atomic_medium.hpp"
#include "nanofiber/constants.hpp"

namespace nanofiber {

struct ProbeConfig {
  double power_w = constants::probe_power;
  Eigen::ArrayXd detuning_grid_mhz;
  double dwell_s = 0.0;  ///< integration time per sample
  double wavelength_m = constants::probe_wavelength;
  int averages = constants::scan_averages;
  double parasitic_phase_rad = 0.0;  ///< residual uncompensated birefringence

  void validate() const;
  /// -250..+200 MHz in 1 MHz steps, dwell = 0.5 ms scan / #points.
  static ProbeConfig scan_defaults();
  /// Single fixed detuning (decay measurements), dwell = sample interval.
  static ProbeConfig fixed_detuning(double detuning_mhz, double dwell_s);
};

struct NoiseModel {
  bool shot_noise = true;
  double detector_noise_rms_w = 0.0;  ///< Gaussian, per APD, per sample
  double quantum_efficiency = constants::quantum_efficiency;
  std::uint64_t seed = 1021;

  void validate() const;
  static NoiseModel off() { return {false, 0.0, constants::quantum_efficiency, 1021}; }
};

/// Ensemble calibration used by the forward model.
struct SimCalibration {
  double eta = constants::od_per_atom;            ///< OD_par per atom
  double rho = constants::coupling_asymmetry;     ///< I_par/I_perp at the atoms
  LineSystem lines = LineSystem::cesium_d2();     ///< phi_max is set per run

  /// Far-wing phase-difference slope (rad*MHz/atom) implied by eta and rho.
  double dphi_slope_rad_mhz_per_atom() const {
    return 0.25 * eta * lines.gamma_mhz * (1.0 - 1.0 / rho);
  }
};

struct SpectrumScan {
  Eigen::ArrayXd detuning_mhz;
  Eigen::ArrayXd p_plus_w;   ///< detected (QE-scaled) power, averaged
  Eigen::ArrayXd p_minus_w;
  Eigen::ArrayXd s3_norm;

  double n_atoms = 0.0;
  SimCalibration calibration;
  ProbeConfig probe;
  NoiseModel noise;
  bool has_noise_metadata = true;

  Eigen::Index size() const { return detuning_mhz.size(); }
};

struct DecayConfig {
  double duration_s = 0.1;
  double extra_loss_rate_per_s = 0.0;  ///< probe-induced loss, continuous channel only
  int pulsed_delays = 25;
  int pulsed_averages = constants::pulsed_averages;
  double pulsed_photons_per_atom = 0.025;  ///< detected per pulse (assumption)
  double pulsed_scale_factor = 1.0;        ///< saturation-calibration scale

  void validate() const;
};

struct DecayTrace {
  Eigen::ArrayXd cont_t_s, cont_dphi_rad, cont_atoms;
  Eigen::ArrayXd pulsed_t_s, pulsed_transmission, pulsed_atoms;

  double n0 = 0.0;
  double tau_s = 0.0;
  DecayConfig config;
  SimCalibration calibration;
  ProbeConfig probe;
  NoiseModel noise;
};

/// Frequency scan of the Stokes readout for `n_atoms` trapped atoms.
/// Deterministic for a fixed seed. Throws std::invalid_argument on an empty
/// or non-monotone grid.
SpectrumScan simulate_scan(double n_atoms, const SimCalibration& calibration,
                           const ProbeConfig& probe, const NoiseModel& noise);

/// Paired continuous-phase and pulsed-absorption decay records with
/// N(t) = N0 exp(-t/tau); the continuous channel adds the optional
/// probe-induced extra loss rate. `probe` must carry a single detuning.
DecayTrace simulate_decay(double n0, double tau_s, const SimCalibration& calibration,
                          const ProbeConfig& probe, const NoiseModel& noise,
                          const DecayConfig& config);

/// Shot-noise-limited atom-number sensitivity (atoms per sqrt(Hz)) of the
/// dispersive readout at the given probe power and detuning.
double sensitivity_estimate(double power_w, double detuning_mhz,
                            double dphi_slope_rad_mhz_per_atom,
                            double wavelength_m = constants::probe_wavelength);

/// Minimum detectable atom number for a given integration time.
double minimum_detectable_atoms(double sensitivity_per_sqrt_hz, double integration_s);

/// Delta-method variance of the averaged S3/S0 sample at one grid point,
/// given the ideal detected APD powers. Matches the Monte Carlo spread.
double analytic_s3_variance(double p_plus_w, double p_minus_w,
                            const ProbeConfig& probe, const NoiseModel& noise);

}  // namespace nanofiber
