// Headline-number consistency report: the calibration chain, mode asymmetry,
// zero crossing, prefactor bound, sensitivity and scattering-rate estimates,
// each with its acceptance band.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nanofiber/constants.hpp"

namespace nanofiber {

struct ReportInputs {
  double phi_max = constants::phi_max_reference;
  double n_atoms = constants::reference_atom_number;
  double rho = constants::coupling_asymmetry;  ///< used in the calibration chain
  double probe_power_w = constants::probe_power;
  double sensitivity_detuning_mhz = 70.0;
  double scattering_detuning_mhz = 165.0;
  double integration_s = 5e-3;
  /// When set, the chain starts from eta instead of phi_max.
  double eta_override = 0.0;
};

struct ReportCheck {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct ConsistencyReport {
  ReportInputs inputs;
  std::vector<ReportCheck> checks;
  bool all_pass = false;
};

/// Runs the full chain (solves the fiber mode, evaluates the model numbers)
/// and compares each value against its band.
ConsistencyReport build_report(const ReportInputs& inputs = {});

std::string format_report(const ConsistencyReport& report);
nlohmann::json report_json(const ConsistencyReport& report);

}  // namespace nanofiber
