// Command-line surface of the nanofiber dispersive-interface simulator:
// mode solving, synthetic scans and decay traces, fits, sensitivity numbers
// and the headline consistency report. Every run writes a JSON metadata
// sidecar sufficient to reproduce it bit-identically.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nanofiber/constants.hpp"
#include "nanofiber/fiber_modes.hpp"
#include "nanofiber/inference.hpp"
#include "nanofiber/io.hpp"
#include "nanofiber/measurement_sim.hpp"
#include "nanofiber/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nanofiber;

namespace {

// JSON config files: top-level keys are global options, one nested object
// per subcommand. Unknown keys are rejected by CLI11.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const std::exception& error) {
      throw CLI::FileError(std::string("config file is not valid JSON: ") +
                           error.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static void flatten(const json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto deeper = parents;
        deeper.push_back(key);
        flatten(value, deeper, items);
      } else {
        CLI::ConfigItem item;
        item.parents = parents;
        item.name = key;
        if (value.is_array())
          for (const auto& v : value) item.inputs.push_back(scalar(v));
        else
          item.inputs.push_back(scalar(value));
        items.push_back(item);
      }
    }
  }

  static std::string scalar(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }
};

struct GlobalOptions {
  std::string output_dir = ".";
  std::uint64_t seed = 1021;
};

fs::path out_path(const GlobalOptions& global, const std::string& name) {
  fs::create_directories(global.output_dir);
  return fs::path(global.output_dir) / name;
}

void write_with_meta(const GlobalOptions& global, const std::string& stem,
                     const std::string& csv, json meta) {
  meta["seed"] = global.seed;
  io::write_text_file(out_path(global, stem + ".csv"), csv);
  io::write_text_file(out_path(global, stem + ".meta.json"), meta.dump(2) + "\n");
}

Eigen::ArrayXd make_grid(double start, double stop, double step) {
  const auto n = static_cast<Eigen::Index>(std::floor((stop - start) / step + 0.5)) + 1;
  if (n < 1) throw std::invalid_argument("empty detuning grid");
  return Eigen::ArrayXd::LinSpaced(n, start, start + step * static_cast<double>(n - 1));
}

// --- modes -----------------------------------------------------------------

struct ModesOptions {
  double radius_nm = constants::fiber_radius * 1e9;
  double core_index = constants::silica_index;
  double cladding_index = constants::vacuum_index;
  double wavelength_nm = constants::probe_wavelength * 1e9;
  double distance_nm = constants::atom_surface_distance * 1e9;
  bool intensity_map = false;
  double map_extent_nm = 1000.0;
  double map_step_nm = 20.0;
};

int run_modes(const GlobalOptions& global, const ModesOptions& opt) {
  const FiberGeometry geometry{opt.radius_nm * 1e-9, opt.core_index,
                               opt.cladding_index, opt.wavelength_nm * 1e-9};
  const AtomGeometry atom{opt.distance_nm * 1e-9, 0.0};
  const ModeSolution mode = solve_he11(geometry);

  json summary = {{"beta_rad_per_m", mode.beta},
                  {"n_eff", mode.effective_index},
                  {"h_per_m", mode.h},
                  {"q_per_m", mode.q},
                  {"v_number", geometry.v_number()},
                  {"a_eff_um2", effective_area(mode, atom) * 1e12},
                  {"rho", coupling_asymmetry(mode, atom)},
                  {"seed", global.seed},
                  {"inputs",
                   {{"radius_nm", opt.radius_nm},
                    {"core_index", opt.core_index},
                    {"cladding_index", opt.cladding_index},
                    {"wavelength_nm", opt.wavelength_nm},
                    {"distance_nm", opt.distance_nm},
                    {"map_extent_nm", opt.map_extent_nm},
                    {"map_step_nm", opt.map_step_nm}}}};
  io::write_text_file(out_path(global, "modes.json"), summary.dump(2) + "\n");

  if (opt.intensity_map) {
    // Fig.-2-style evanescent map, one file per polarization axis.
    for (const double axis : {0.0, constants::pi / 2.0}) {
      std::string csv = "x_nm,y_nm,I_over_P_per_um2\n";
      const auto steps = static_cast<int>(opt.map_extent_nm / opt.map_step_nm);
      for (int iy = -steps; iy <= steps; ++iy) {
        for (int ix = -steps; ix <= steps; ++ix) {
          const double x = ix * opt.map_step_nm, y = iy * opt.map_step_nm;
          const double r = std::hypot(x, y) * 1e-9;
          if (r < geometry.radius) continue;  // evanescent region only
          const double intensity =
              intensity_at(mode, r, std::atan2(y, x), axis) * 1e-12;
          csv += io::format_double(x) + ',' + io::format_double(y) + ',' +
                 io::format_double(intensity) + '\n';
        }
      }
      io::write_text_file(
          out_path(global, axis == 0.0 ? "intensity_par.csv" : "intensity_perp.csv"),
          csv);
    }
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// --- scan / figure3 ----------------------------------------------------------

struct ScanOptions {
  double atoms = constants::reference_atom_number;
  double eta = constants::od_per_atom;
  double rho = constants::coupling_asymmetry;
  double offset_mhz = 0.0;
  double power_pw = constants::probe_power * 1e12;
  double grid_start = -250.0, grid_stop = 200.0, grid_step = 1.0;
  int averages = constants::scan_averages;
  std::string noise = "on";
  double detector_noise_rms_w = 0.0;
  double quantum_efficiency = constants::quantum_efficiency;
  double parasitic_phase_rad = 0.0;
  int fit_lines = 2;
};

SpectrumScan run_scan_common(const GlobalOptions& global, const ScanOptions& opt) {
  SimCalibration cal;
  cal.eta = opt.eta;
  cal.rho = opt.rho;
  cal.lines = LineSystem::cesium_d2(0.0, opt.offset_mhz);

  ProbeConfig probe = ProbeConfig::scan_defaults();
  probe.detuning_grid_mhz = make_grid(opt.grid_start, opt.grid_stop, opt.grid_step);
  probe.dwell_s =
      constants::scan_duration / static_cast<double>(probe.detuning_grid_mhz.size());
  probe.power_w = opt.power_pw * 1e-12;
  probe.averages = opt.averages;
  probe.parasitic_phase_rad = opt.parasitic_phase_rad;

  NoiseModel noise;
  noise.shot_noise = opt.noise == "on";
  noise.detector_noise_rms_w = opt.detector_noise_rms_w;
  noise.quantum_efficiency = opt.quantum_efficiency;
  noise.seed = global.seed;

  return simulate_scan(opt.atoms, cal, probe, noise);
}

int run_scan(const GlobalOptions& global, const ScanOptions& opt) {
  const SpectrumScan scan = run_scan_common(global, opt);
  write_with_meta(global, "scan", io::to_csv(scan), io::metadata_json(scan));
  return 0;
}

int run_figure3(const GlobalOptions& global, const ScanOptions& opt) {
  const SpectrumScan scan = run_scan_common(global, opt);
  write_with_meta(global, "fig3_scan", io::to_csv(scan), io::metadata_json(scan));

  SpectrumFitConfig fit_config;
  fit_config.rho = opt.rho;
  if (opt.fit_lines == 3)
    fit_config.model = LineSystem::cesium_d2();
  FitResult fit = fit_spectrum(scan, fit_config);
  io::write_text_file(out_path(global, "fig3_fit.json"),
                      io::to_json(fit).dump(2) + "\n");

  // Fitted model curve on the scan grid.
  LineSystem fitted = fit_config.model;
  fitted.phi_max = fit.parameter("phi_max");
  fitted.global_offset_mhz = fit.parameter("offset_mhz");
  std::string csv = "detuning_mhz,phi_par_rad\n";
  for (Eigen::Index i = 0; i < scan.size(); ++i)
    csv += io::format_double(scan.detuning_mhz(i)) + ',' +
           io::format_double(dispersive_phase(fitted, scan.detuning_mhz(i))) + '\n';
  io::write_text_file(out_path(global, "fig3_model.csv"), csv);

  std::cout << io::to_json(fit).dump(2) << "\n";
  if (!fit.converged) {
    std::cerr << "fit failed: " << fit.status << "\n";
    return 1;
  }
  return 0;
}

// --- decay / figure4 ---------------------------------------------------------

struct DecayOptions {
  double atoms = 1000.0;
  double tau_ms = 48.0;
  double detuning_mhz = 165.0;
  double duration_s = 0.1;
  double dwell_ms = 0.5;
  double extra_loss_per_s = 0.0;
  double eta = constants::od_per_atom;
  double rho = constants::coupling_asymmetry;
  double power_pw = constants::probe_power * 1e12;
  int averages = constants::scan_averages;
  int pulsed_averages = constants::pulsed_averages;
  double pulsed_photons_per_atom = DecayConfig{}.pulsed_photons_per_atom;
  double pulsed_scale = 1.0;
  std::string noise = "on";
};

DecayTrace run_decay_common(const GlobalOptions& global, const DecayOptions& opt) {
  SimCalibration cal;
  cal.eta = opt.eta;
  cal.rho = opt.rho;

  ProbeConfig probe =
      ProbeConfig::fixed_detuning(opt.detuning_mhz, opt.dwell_ms * 1e-3);
  probe.power_w = opt.power_pw * 1e-12;
  probe.averages = opt.averages;

  NoiseModel noise;
  noise.shot_noise = opt.noise == "on";
  noise.seed = global.seed;

  DecayConfig config;
  config.duration_s = opt.duration_s;
  config.extra_loss_rate_per_s = opt.extra_loss_per_s;
  config.pulsed_averages = opt.pulsed_averages;
  config.pulsed_photons_per_atom = opt.pulsed_photons_per_atom;
  config.pulsed_scale_factor = opt.pulsed_scale;

  return simulate_decay(opt.atoms, opt.tau_ms * 1e-3, cal, probe, noise, config);
}

int run_decay(const GlobalOptions& global, const DecayOptions& opt) {
  const DecayTrace trace = run_decay_common(global, opt);
  write_with_meta(global, "decay", io::to_csv(trace), io::metadata_json(trace));
  return 0;
}

int run_figure4(const GlobalOptions& global, const DecayOptions& opt) {
  const DecayTrace trace = run_decay_common(global, opt);
  write_with_meta(global, "fig4_traces", io::to_csv(trace), io::metadata_json(trace));

  int status = 0;
  for (const auto& [channel, t, atoms] :
       {std::tuple{"continuous", trace.cont_t_s, trace.cont_atoms},
        std::tuple{"pulsed", trace.pulsed_t_s, trace.pulsed_atoms}}) {
    try {
      const FitResult fit = fit_decay(t, atoms);
      io::write_text_file(out_path(global, std::string("fig4_fit_") + channel + ".json"),
                          io::to_json(fit).dump(2) + "\n");
      std::cout << channel << ": tau = " << fit.parameter("tau_s") * 1e3 << " +- "
                << fit.uncertainty("tau_s") * 1e3 << " ms\n";
      if (!fit.converged) {
        std::cerr << channel << " fit failed: " << fit.status << "\n";
        status = 1;
      }
    } catch (const std::exception& error) {
      std::cerr << channel << " fit error: " << error.what() << "\n";
      status = 1;
    }
  }
  return status;
}

// --- fit (from files) ---------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string metadata;
  std::string kind = "spectrum";
  std::string channel = "continuous";
  int fit_lines = 2;
  double rho = constants::coupling_asymmetry;
  std::string output = "fit.json";
};

int run_fit(const GlobalOptions& global, const FitOptions& opt) {
  FitResult fit;
  if (opt.kind == "spectrum") {
    SpectrumScan scan = io::scan_from_csv(io::read_text_file(opt.input));
    if (!opt.metadata.empty())
      io::apply_metadata(scan, json::parse(io::read_text_file(opt.metadata)));
    SpectrumFitConfig config;
    config.rho = opt.rho;
    if (opt.fit_lines == 3) config.model = LineSystem::cesium_d2();
    fit = fit_spectrum(scan, config);
  } else {
    const auto channels = io::trace_from_csv(io::read_text_file(opt.input));
    fit = opt.channel == "pulsed"
              ? fit_decay(channels.pulsed_t_s, channels.pulsed_atoms)
              : fit_decay(channels.cont_t_s, channels.cont_atoms);
  }
  json out = io::to_json(fit);
  out["inputs"] = {{"input", opt.input},   {"metadata", opt.metadata},
                   {"kind", opt.kind},     {"channel", opt.channel},
                   {"fit_lines", opt.fit_lines}, {"rho", opt.rho}};
  io::write_text_file(out_path(global, opt.output), out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return fit.converged ? 0 : 1;
}

// --- sensitivity / report ------------------------------------------------------

struct SensitivityOptions {
  double power_pw = constants::probe_power * 1e12;
  double detuning_mhz = 70.0;
  double slope_mrad_mhz = 23.0;
  double integration_ms = 5.0;
};

int run_sensitivity(const GlobalOptions& global, const SensitivityOptions& opt) {
  const double sens = sensitivity_estimate(opt.power_pw * 1e-12, opt.detuning_mhz,
                                           opt.slope_mrad_mhz * 1e-3);
  const json out = {{"sensitivity_atoms_per_sqrt_hz", sens},
                    {"integration_s", opt.integration_ms * 1e-3},
                    {"min_detectable_atoms",
                     minimum_detectable_atoms(sens, opt.integration_ms * 1e-3)},
                    {"inputs",
                     {{"power_pw", opt.power_pw},
                      {"detuning_mhz", opt.detuning_mhz},
                      {"slope_mrad_mhz", opt.slope_mrad_mhz}}}};
  io::write_text_file(out_path(global, "sensitivity.json"), out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct ReportOptions {
  bool as_json = false;
  double eta = 0.0;
  double phi_max = constants::phi_max_reference;
  double atoms = constants::reference_atom_number;
};

int run_report(const GlobalOptions& global, const ReportOptions& opt) {
  ReportInputs inputs;
  inputs.phi_max = opt.phi_max;
  inputs.n_atoms = opt.atoms;
  inputs.eta_override = opt.eta;
  const ConsistencyReport report = build_report(inputs);
  const json j = report_json(report);
  io::write_text_file(out_path(global, "report.json"), j.dump(2) + "\n");
  if (opt.as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << format_report(report);
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersive nanofiber atom-interface simulator"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--output-dir", global.output_dir, "output directory")
      ->envname("NANOFIBER_OUTPUT_DIR");
  app.add_option("--seed", global.seed, "RNG seed for all noise draws");

  ModesOptions modes_opt;
  auto* modes = app.add_subcommand("modes", "solve the HE11 mode, emit summary + maps");
  modes->add_option("--radius-nm", modes_opt.radius_nm, "fiber radius (nm)");
  modes->add_option("--core-index", modes_opt.core_index, "core refractive index");
  modes->add_option("--cladding-index", modes_opt.cladding_index, "cladding index");
  modes->add_option("--wavelength-nm", modes_opt.wavelength_nm, "wavelength (nm)");
  modes->add_option("--distance-nm", modes_opt.distance_nm, "atom-surface distance (nm)");
  modes->add_flag("--intensity-map", modes_opt.intensity_map, "emit intensity map CSVs");
  modes->add_option("--map-extent-nm", modes_opt.map_extent_nm, "map half-extent (nm)");
  modes->add_option("--map-step-nm", modes_opt.map_step_nm, "map step (nm)");

  ScanOptions scan_opt;
  auto add_scan_options = [&](CLI::App* cmd, ScanOptions& o) {
    cmd->add_option("--atoms", o.atoms, "trapped atom number");
    cmd->add_option("--eta", o.eta, "optical density per atom");
    cmd->add_option("--rho", o.rho, "coupling asymmetry");
    cmd->add_option("--offset-mhz", o.offset_mhz, "true frequency-axis offset");
    cmd->add_option("--power-pw", o.power_pw, "probe power (pW)");
    cmd->add_option("--grid-start-mhz", o.grid_start, "scan start");
    cmd->add_option("--grid-stop-mhz", o.grid_stop, "scan stop");
    cmd->add_option("--grid-step-mhz", o.grid_step, "scan step");
    cmd->add_option("--averages", o.averages, "repetitions per point");
    cmd->add_option("--noise", o.noise, "on|off")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--detector-noise-w", o.detector_noise_rms_w,
                    "detector noise RMS per APD sample (W)");
    cmd->add_option("--quantum-efficiency", o.quantum_efficiency, "APD QE");
    cmd->add_option("--parasitic-phase-rad", o.parasitic_phase_rad,
                    "residual uncompensated birefringence");
  };
  auto* scan = app.add_subcommand("scan", "simulate a frequency scan");
  add_scan_options(scan, scan_opt);

  ScanOptions fig3_opt;
  auto* figure3 = app.add_subcommand("figure3", "scan + dispersive fit + model curve");
  add_scan_options(figure3, fig3_opt);
  figure3->add_option("--fit-lines", fig3_opt.fit_lines, "2 or 3 transitions in the fit")
      ->check(CLI::IsMember({2, 3}));

  DecayOptions decay_opt;
  auto add_decay_options = [&](CLI::App* cmd, DecayOptions& o) {
    cmd->add_option("--atoms", o.atoms, "initial atom number");
    cmd->add_option("--tau-ms", o.tau_ms, "trap decay constant (ms)");
    cmd->add_option("--detuning-mhz", o.detuning_mhz, "probe detuning");
    cmd->add_option("--duration-s", o.duration_s, "measurement duration (s)");
    cmd->add_option("--dwell-ms", o.dwell_ms, "continuous sample interval (ms)");
    cmd->add_option("--extra-loss", o.extra_loss_per_s, "probe-induced loss rate (1/s)");
    cmd->add_option("--eta", o.eta, "optical density per atom");
    cmd->add_option("--rho", o.rho, "coupling asymmetry");
    cmd->add_option("--power-pw", o.power_pw, "probe power (pW)");
    cmd->add_option("--averages", o.averages, "continuous-channel averages");
    cmd->add_option("--pulsed-averages", o.pulsed_averages, "pulsed-channel averages");
    cmd->add_option("--pulsed-photons-per-atom", o.pulsed_photons_per_atom,
                    "detected photons per atom per pulse");
    cmd->add_option("--pulsed-scale", o.pulsed_scale,
                    "saturation-calibration scale factor");
    cmd->add_option("--noise", o.noise, "on|off")->check(CLI::IsMember({"on", "off"}));
  };
  auto* decay = app.add_subcommand("decay", "simulate a decay trace");
  add_decay_options(decay, decay_opt);

  DecayOptions fig4_opt;
  auto* figure4 = app.add_subcommand("figure4", "decay traces + both channel fits");
  add_decay_options(figure4, fig4_opt);

  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "fit a scan or trace file");
  fit->add_option("--input", fit_opt.input, "input CSV")->required();
  fit->add_option("--metadata", fit_opt.metadata, "metadata JSON sidecar");
  fit->add_option("--kind", fit_opt.kind, "spectrum|decay")
      ->check(CLI::IsMember({"spectrum", "decay"}));
  fit->add_option("--channel", fit_opt.channel, "continuous|pulsed")
      ->check(CLI::IsMember({"continuous", "pulsed"}));
  fit->add_option("--fit-lines", fit_opt.fit_lines, "2 or 3 transitions")
      ->check(CLI::IsMember({2, 3}));
  fit->add_option("--rho", fit_opt.rho, "coupling asymmetry");
  fit->add_option("--output", fit_opt.output, "output JSON name");

  SensitivityOptions sens_opt;
  auto* sensitivity = app.add_subcommand("sensitivity", "shot-noise sensitivity numbers");
  sensitivity->add_option("--power-pw", sens_opt.power_pw, "probe power (pW)");
  sensitivity->add_option("--detuning-mhz", sens_opt.detuning_mhz, "probe detuning");
  sensitivity->add_option("--slope-mrad-mhz", sens_opt.slope_mrad_mhz,
                          "per-atom phase-difference slope");
  sensitivity->add_option("--integration-ms", sens_opt.integration_ms,
                          "integration time (ms)");

  ReportOptions report_opt;
  auto* report = app.add_subcommand("report", "headline consistency table");
  report->add_flag("--json", report_opt.as_json, "machine-readable output");
  report->add_option("--eta", report_opt.eta, "override optical density per atom");
  report->add_option("--phi-max", report_opt.phi_max, "maximum phase shift (rad)");
  report->add_option("--atoms", report_opt.atoms, "reference atom number");

  CLI11_PARSE(app, argc, argv);

  try {
    if (modes->parsed()) return run_modes(global, modes_opt);
    if (scan->parsed()) return run_scan(global, scan_opt);
    if (figure3->parsed()) return run_figure3(global, fig3_opt);
    if (decay->parsed()) return run_decay(global, decay_opt);
    if (figure4->parsed()) return run_figure4(global, fig4_opt);
    if (fit->parsed()) return run_fit(global, fit_opt);
    if (sensitivity->parsed()) return run_sensitivity(global, sens_opt);
    if (report->parsed()) return run_report(global, report_opt);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
