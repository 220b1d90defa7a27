#include "nanofiber/report.hpp"

#include <cmath>
#include <sstream>

#include "nanofiber/fiber_modes.hpp"
#include "nanofiber/inference.hpp"
#include "nanofiber/measurement_sim.hpp"
#include "nanofiber/polarimetry.hpp"

namespace nanofiber {

namespace {

ReportCheck check(const std::string& name, double value, double lower, double upper) {
  return {name, value, lower, upper, value >= lower && value <= upper};
}

}  // namespace

ConsistencyReport build_report(const ReportInputs& in) {
  ConsistencyReport report;
  report.inputs = in;

  double phi_max = in.phi_max;
  if (in.eta_override > 0.0)
    phi_max = atom_number_to_phi_max(in.n_atoms, in.eta_override);

  // Mode solution for the asymmetry and the effective area.
  const FiberGeometry geometry{constants::fiber_radius, constants::silica_index,
                               constants::vacuum_index, constants::probe_wavelength};
  const AtomGeometry atom{constants::atom_surface_distance, 0.0};
  const ModeSolution mode = solve_he11(geometry);
  const double rho_mode = coupling_asymmetry(mode, atom);
  const double area = effective_area(mode, atom);
  report.checks.push_back(check("mode_asymmetry_rho", rho_mode, 2.65, 2.95));

  // Calibration chain.
  const double od = 4.0 * phi_max;
  const double eta = od / in.n_atoms;
  const double slope_par_mrad =
      phi_max * constants::natural_linewidth_mhz / in.n_atoms * 1e3;
  const double slope_dphi_mrad = slope_par_mrad * (1.0 - 1.0 / in.rho);
  report.checks.push_back(check("od_par", od, 27.93 - 0.07, 27.93 + 0.07));
  report.checks.push_back(check("eta_od_per_atom", eta, 0.0274 - 0.002, 0.0274 + 0.002));
  report.checks.push_back(
      check("per_atom_phi_par_slope_mrad_mhz", slope_par_mrad, 34.0, 38.0));
  report.checks.push_back(
      check("per_atom_dphi_slope_mrad_mhz", slope_dphi_mrad, 22.0, 24.0));

  // Zero crossing of the three-line model between F'=4 and F'=5.
  LineSystem lines = LineSystem::cesium_d2(phi_max);
  const double crossing =
      model_zero_crossing(lines, constants::line_offset_f4_mhz + 20.0, -40.0);
  report.checks.push_back(check("zero_crossing_mhz", crossing, -187.0, -157.0));

  // Prefactor approximation bound at 25% absorption.
  const double pref_err = prefactor_error(std::sqrt(0.75), in.rho);
  report.checks.push_back(check("prefactor_error_at_t2_0p75", pref_err, 0.0042, 0.0044));

  // Shot-noise sensitivity and the minimum detectable atom number.
  const double sensitivity = sensitivity_estimate(
      in.probe_power_w, in.sensitivity_detuning_mhz, slope_dphi_mrad * 1e-3);
  report.checks.push_back(check("sensitivity_atoms_per_sqrt_hz", sensitivity, 0.5, 0.9));
  const double min_atoms = minimum_detectable_atoms(sensitivity, in.integration_s);
  report.checks.push_back(check("min_detectable_atoms_5ms", min_atoms, 8.0, 20.0));

  // Scattering rate with sigma_5 = eta * A_eff.
  const double rate =
      scattering_rate(lines, in.probe_power_w, in.scattering_detuning_mhz, area,
                      rho_mode, eta * area, constants::probe_wavelength);
  report.checks.push_back(check("scattering_rate_hz", rate, 50.0 / 4.0, 50.0 * 4.0));

  report.all_pass = true;
  for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
  return report;
}

std::string format_report(const ConsistencyReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << " = " << c.value
        << "  (band " << c.lower << " .. " << c.upper << ")\n";
  }
  out << (report.all_pass ? "all checks passed" : "some checks FAILED") << "\n";
  return out.str();
}

nlohmann::json report_json(const ConsistencyReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"lower", c.lower},
                      {"upper", c.upper},
                      {"pass", c.pass}});
  return {{"inputs",
           {{"phi_max", report.inputs.phi_max},
            {"n_atoms", report.inputs.n_atoms},
            {"rho", report.inputs.rho},
            {"probe_power_w", report.inputs.probe_power_w},
            {"sensitivity_detuning_mhz", report.inputs.sensitivity_detuning_mhz},
            {"scattering_detuning_mhz", report.inputs.scattering_detuning_mhz},
            {"integration_s", report.inputs.integration_s},
            {"eta_override", report.inputs.eta_override}}},
          {"checks", checks},
          {"all_pass", report.all_pass}};
}

}  // namespace nanofiber
