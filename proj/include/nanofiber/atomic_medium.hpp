// Complex optical response of the trapped ensemble: multi-line dispersive
// phase, Lorentzian optical density, the per-eigenmode transmission/phase
// pair, and the per-atom scattering rate. Linear (low-saturation) regime.
#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <vector>

namespace nanofiber {

/// One F=4 -> F' hyperfine transition of the Cs D2 line.
struct TransitionLine {
  int f_prime;                  ///< 3, 4 or 5
  double frequency_offset_mhz;  ///< line center relative to F'=5
  double strength_ratio;        ///< sigma_F' / sigma_5
};

/// Lorentzian line system with a common maximum phase shift phi_max
/// (pinned to the F'=5 transition; OD_max = 4 phi_max).
struct LineSystem {
  std::vector<TransitionLine> lines;
  double gamma_mhz = 5.2;         ///< natural linewidth Gamma/2pi
  double phi_max = 0.0;           ///< rad
  double global_offset_mhz = 0.0; ///< fitted frequency-axis offset

  double od_max() const { return 4.0 * phi_max; }
  /// Keep only the listed F' lines (e.g. {4, 5} for the two nearest).
  LineSystem with_lines(std::initializer_list<int> f_primes) const;
  /// Throws std::invalid_argument on malformed line structure.
  void validate() const;

  /// The three-line Cs D2 system (F'=3,4,5) with standard offsets.
  static LineSystem cesium_d2(double phi_max = 0.0, double global_offset_mhz = 0.0);
};

/// Amplitude transmissions and phase shifts of the two eigenmodes at one
/// probe detuning.
struct OpticalResponse {
  double t_par = 1.0, t_perp = 1.0;   ///< in (0, 1]
  double phi_par = 0.0, phi_perp = 0.0;  ///< rad
  double phase_difference() const { return phi_par - phi_perp; }
};

/// Dispersive phase shift (rad) at `probe_mhz` (relative to F'=5):
/// phi = -phi_max * sum 2 (sigma_F'/sigma_5) D/(D^2+1), D = 2(nu-nu_F'-off)/Gamma.
double dispersive_phase(const LineSystem& system, double probe_mhz);
Eigen::ArrayXd dispersive_phase(const LineSystem& system, const Eigen::ArrayXd& probe_mhz);

/// Optical density at `probe_mhz`: OD = OD_max * sum (sigma_F'/sigma_5)/(D^2+1).
/// Amplitude transmission is exp(-OD/2).
double optical_density(const LineSystem& system, double probe_mhz);
Eigen::ArrayXd optical_density(const LineSystem& system, const Eigen::ArrayXd& probe_mhz);

/// Both eigenmodes at one detuning. phi_max of `system` refers to the par
/// mode; the perp mode is scaled down by the coupling asymmetry.
OpticalResponse response_at(const LineSystem& system, double probe_mhz,
                            double asymmetry);

/// Photon scattering rate per atom (Hz) at low saturation. `sigma5_m2` is the
/// resonant F'=5 cross-section; the intensity at the atoms assumes half the
/// probe power per eigenmode with the perp mode reduced by the asymmetry.
double scattering_rate(const LineSystem& system, double probe_power_w,
                       double detuning_mhz, double effective_area_m2,
                       double asymmetry, double sigma5_m2, double wavelength_m);

/// phi_max = N_at * eta / 4 (eta: optical density per atom).
double atom_number_to_phi_max(double n_atoms, double eta);

}  // namespace nanofiber
