// Parameter estimation: damped Gauss-Newton least squares, the dispersive
// spectrum fit (phi_max, frequency offset), exponential decay fits, and the
// far-wing phase -> atom-number conversion.
#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanofiber/atomic_medium.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/measurement_sim.hpp"

namespace nanofiber {

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd parameters;
  Eigen::VectorXd uncertainties;   ///< 1-sigma from the solution covariance
  Eigen::MatrixXd covariance;
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string status;
  int points_used = 0;
  int points_masked = 0;
  std::vector<std::string> warnings;

  double parameter(const std::string& name) const;
  double uncertainty(const std::string& name) const;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LsqOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-10;
  double step_tol = 1e-12;
  double initial_damping = 0.0;  ///< Levenberg damping, raised on rejection
  std::vector<std::string> parameter_names;
};

/// Damped Gauss-Newton on 0.5*|r(x)|^2: accepted steps never increase the
/// cost; stops on gradient norm, step norm, or the iteration cap. A missing
/// Jacobian is replaced by central finite differences. Covariance is
/// (J^T J)^-1 at the solution, unscaled.
FitResult least_squares_solve(const ResidualFn& residual, const Eigen::VectorXd& x0,
                              const LsqOptions& options = {},
                              const JacobianFn& jacobian = nullptr);

struct SpectrumFitConfig {
  /// Fit model; the default uses the two transitions nearest the probe.
  LineSystem model = LineSystem::cesium_d2().with_lines({4, 5});
  double rho = constants::coupling_asymmetry;
  /// Detuning windows [lo, hi] (MHz) always excluded from the fit.
  std::vector<std::pair<double, double>> mask_windows;
  /// Drop points with t_par^2 below `min_transmission_sq`, estimated from the
  /// measured total-power dip relative to the far-wing baseline.
  bool auto_absorption_mask = true;
  double min_transmission_sq = 0.75;
  std::optional<double> phi_max_init;
  std::optional<double> offset_init;
};

/// Extracted phase-vs-detuning record the spectrum fit operates on.
struct PhaseSpectrum {
  Eigen::ArrayXd detuning_mhz;
  Eigen::ArrayXd phi_par;
  Eigen::ArrayXd sigma_phi;  ///< per-point 1-sigma (1.0 when unknown)
  bool weighted = false;
  bool branch_flagged = false;  ///< a continuation step exceeded pi/2
  int points_masked = 0;
};

/// Masking, S3 -> phase extraction and nearest-branch unwrapping.
PhaseSpectrum extract_phase_spectrum(const SpectrumScan& scan,
                                     const SpectrumFitConfig& config);

/// Weighted fit of the dispersive model to an extracted scan; recovers
/// {phi_max, offset_mhz}. Throws std::invalid_argument with fewer than 10
/// usable points.
FitResult fit_spectrum(const SpectrumScan& scan,
                       const SpectrumFitConfig& config = {});

/// Analytic Jacobian of the dispersive model w.r.t. {phi_max, offset_mhz},
/// one row per grid point. The fit consumes this; tests pin it against
/// finite differences of dispersive_phase.
Eigen::MatrixXd spectrum_model_jacobian(const LineSystem& model,
                                        const Eigen::ArrayXd& detuning_mhz,
                                        double phi_max, double offset_mhz);

/// N(t) = N0 exp(-t/tau) fit; returns {n0, tau_s}. The result is flagged
/// (not converged) when the time span is shorter than the fitted tau.
FitResult fit_decay(const Eigen::ArrayXd& t_s, const Eigen::ArrayXd& atoms);

struct Calibration {
  double per_atom_dphi_slope_mrad_mhz = 23.0;
  double per_atom_phi_par_slope_mrad_mhz = 36.0;
  double eta = 0.027;
  double rho = constants::coupling_asymmetry;

  /// Checks dphi_slope = phi_par_slope * (1 - 1/rho) within the quoted
  /// 1 mrad*MHz/atom uncertainty; throws std::invalid_argument otherwise.
  void validate() const;
};

struct AtomEstimate {
  double atoms = 0.0;
  bool far_wing = true;  ///< false when |detuning| < 10 Gamma
};

/// Far-wing inversion N = -dphi * detuning / slope (blue detuning gives a
/// negative phase difference, so physical inputs yield positive counts).
AtomEstimate atoms_from_phase(double dphi_rad, double detuning_mhz,
                              const Calibration& calibration);

/// Zero crossing of the dispersive model in [lo, hi] (bisection).
double model_zero_crossing(const LineSystem& system, double lo_mhz, double hi_mhz);

}  // namespace nanofiber
