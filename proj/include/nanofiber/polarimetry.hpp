// Jones-state propagation through the birefringent ensemble and the
// quarter-waveplate + PBS Stokes readout, plus the inversion back to the
// par-mode phase and the validity bound of the unit-prefactor approximation.
#pragma once

#include <Eigen/Core>
#include <complex>

#include "nanofiber/atomic_medium.hpp"

namespace nanofiber {

/// Pure polarization state in the (par, perp) eigenmode basis, amplitudes in
/// sqrt(W) so that |par|^2 + |perp|^2 is the beam power.
struct JonesState {
  Eigen::Vector2cd amplitudes;

  std::complex<double> par() const { return amplitudes(0); }
  std::complex<double> perp() const { return amplitudes(1); }
  double power() const { return amplitudes.squaredNorm(); }

  /// Linear polarization at 45 degrees to the atom plane.
  static JonesState balanced(double power_w);
};

struct StokesVector {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double normalized_s1() const { return s1 / s0; }
  double normalized_s2() const { return s2 / s0; }
  double normalized_s3() const { return s3 / s0; }
};

/// Applies the per-eigenmode amplitude transmissions and phase shifts.
JonesState propagate(const JonesState& input, const OpticalResponse& response);

/// Full Stokes vector of a Jones state.
StokesVector stokes_vector(const JonesState& state);

/// S3/S0 from the sigma+/- projections; the sign convention makes
/// S3/S0 = 2 t_par t_perp sin(phi_par - phi_perp) / (t_par^2 + t_perp^2).
/// Throws std::invalid_argument on a zero-power state.
double stokes_s3(const JonesState& output);

/// phi_par = (1 - 1/asymmetry)^-1 * asin(S3/S0), principal branch.
/// Throws std::domain_error for |s3_over_s0| > 1.
double extract_phi_par(double s3_over_s0, double asymmetry);

/// Relative error 1 - 2 t_par t_perp / (t_par^2 + t_perp^2) of setting the
/// Eq.-style prefactor to one, with t_perp = t_par^(1/asymmetry).
double prefactor_error(double t_par, double asymmetry);

}  // namespace nanofiber
