#include "nanofiber/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nanofiber::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("bad numeric field: '" + text + "'");
  return value;
}

Eigen::ArrayXd to_array(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json lines_json(const LineSystem& sys) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& line : sys.lines)
    lines.push_back({{"f_prime", line.f_prime},
                     {"offset_mhz", line.frequency_offset_mhz},
                     {"strength_ratio", line.strength_ratio}});
  return {{"gamma_mhz", sys.gamma_mhz},
          {"global_offset_mhz", sys.global_offset_mhz},
          {"lines", lines}};
}

LineSystem lines_from_json(const nlohmann::json& j) {
  LineSystem sys;
  sys.gamma_mhz = j.at("gamma_mhz").get<double>();
  sys.global_offset_mhz = j.at("global_offset_mhz").get<double>();
  sys.lines.clear();
  for (const auto& line : j.at("lines"))
    sys.lines.push_back({line.at("f_prime").get<int>(),
                         line.at("offset_mhz").get<double>(),
                         line.at("strength_ratio").get<double>()});
  return sys;
}

nlohmann::json probe_json(const ProbeConfig& probe) {
  return {{"power_w", probe.power_w},
          {"grid_start_mhz", probe.detuning_grid_mhz(0)},
          {"grid_stop_mhz", probe.detuning_grid_mhz(probe.detuning_grid_mhz.size() - 1)},
          {"grid_points", probe.detuning_grid_mhz.size()},
          {"dwell_s", probe.dwell_s},
          {"wavelength_m", probe.wavelength_m},
          {"averages", probe.averages},
          {"parasitic_phase_rad", probe.parasitic_phase_rad}};
}

ProbeConfig probe_from_json(const nlohmann::json& j) {
  ProbeConfig probe;
  probe.power_w = j.at("power_w").get<double>();
  probe.detuning_grid_mhz = Eigen::ArrayXd::LinSpaced(
      j.at("grid_points").get<Eigen::Index>(), j.at("grid_start_mhz").get<double>(),
      j.at("grid_stop_mhz").get<double>());
  probe.dwell_s = j.at("dwell_s").get<double>();
  probe.wavelength_m = j.at("wavelength_m").get<double>();
  probe.averages = j.at("averages").get<int>();
  probe.parasitic_phase_rad = j.at("parasitic_phase_rad").get<double>();
  return probe;
}

nlohmann::json noise_json(const NoiseModel& noise) {
  return {{"shot_noise", noise.shot_noise},
          {"detector_noise_rms_w", noise.detector_noise_rms_w},
          {"quantum_efficiency", noise.quantum_efficiency},
          {"seed", noise.seed}};
}

NoiseModel noise_from_json(const nlohmann::json& j) {
  NoiseModel noise;
  noise.shot_noise = j.at("shot_noise").get<bool>();
  noise.detector_noise_rms_w = j.at("detector_noise_rms_w").get<double>();
  noise.quantum_efficiency = j.at("quantum_efficiency").get<double>();
  noise.seed = j.at("seed").get<std::uint64_t>();
  return noise;
}

nlohmann::json calibration_json(const SimCalibration& cal) {
  return {{"eta", cal.eta}, {"rho", cal.rho}, {"line_system", lines_json(cal.lines)}};
}

SimCalibration calibration_from_json(const nlohmann::json& j) {
  SimCalibration cal;
  cal.eta = j.at("eta").get<double>();
  cal.rho = j.at("rho").get<double>();
  cal.lines = lines_from_json(j.at("line_system"));
  return cal;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string to_csv(const SpectrumScan& scan) {
  std::string out = "detuning_mhz,p_plus_w,p_minus_w,s3_norm\n";
  for (Eigen::Index i = 0; i < scan.size(); ++i) {
    out += format_double(scan.detuning_mhz(i));
    out += ',';
    out += format_double(scan.p_plus_w(i));
    out += ',';
    out += format_double(scan.p_minus_w(i));
    out += ',';
    out += format_double(scan.s3_norm(i));
    out += '\n';
  }
  return out;
}

std::string to_csv(const TraceChannels& channels) {
  // Merge the two channels on the time axis; blank cells where a channel has
  // no sample at that time.
  std::string out = "t_s,dphi_rad,atoms_cont,atoms_pulsed\n";
  Eigen::Index i = 0, j = 0;
  const Eigen::Index nc = channels.cont_t_s.size(), np = channels.pulsed_t_s.size();
  while (i < nc || j < np) {
    const bool take_cont =
        j >= np || (i < nc && channels.cont_t_s(i) <= channels.pulsed_t_s(j));
    const bool take_pulsed =
        i >= nc || (j < np && channels.pulsed_t_s(j) <= channels.cont_t_s(i));
    const double t = take_cont ? channels.cont_t_s(i) : channels.pulsed_t_s(j);
    out += format_double(t);
    out += ',';
    if (take_cont) {
      out += format_double(channels.cont_dphi_rad(i));
      out += ',';
      out += format_double(channels.cont_atoms(i));
      ++i;
    } else {
      out += ",";
    }
    out += ',';
    if (take_pulsed) {
      out += format_double(channels.pulsed_atoms(j));
      ++j;
    }
    out += '\n';
  }
  return out;
}

std::string to_csv(const DecayTrace& trace) {
  TraceChannels channels;
  channels.cont_t_s = trace.cont_t_s;
  channels.cont_dphi_rad = trace.cont_dphi_rad;
  channels.cont_atoms = trace.cont_atoms;
  channels.pulsed_t_s = trace.pulsed_t_s;
  channels.pulsed_atoms = trace.pulsed_atoms;
  return to_csv(channels);
}

SpectrumScan scan_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "detuning_mhz,p_plus_w,p_minus_w,s3_norm")
    throw std::invalid_argument("unexpected scan CSV header");
  std::vector<double> nu, pp, pm, s3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != 4) throw std::invalid_argument("scan CSV row needs 4 fields");
    nu.push_back(parse_double(fields[0]));
    pp.push_back(parse_double(fields[1]));
    pm.push_back(parse_double(fields[2]));
    s3.push_back(parse_double(fields[3]));
  }
  SpectrumScan scan;
  scan.detuning_mhz = to_array(nu);
  scan.p_plus_w = to_array(pp);
  scan.p_minus_w = to_array(pm);
  scan.s3_norm = to_array(s3);
  scan.has_noise_metadata = false;
  return scan;
}

TraceChannels trace_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "t_s,dphi_rad,atoms_cont,atoms_pulsed")
    throw std::invalid_argument("unexpected trace CSV header");
  std::vector<double> ct, cd, ca, pt, pa;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != 4) throw std::invalid_argument("trace CSV row needs 4 fields");
    const double t = parse_double(fields[0]);
    if (!fields[1].empty() && !fields[2].empty()) {
      ct.push_back(t);
      cd.push_back(parse_double(fields[1]));
      ca.push_back(parse_double(fields[2]));
    }
    if (!fields[3].empty()) {
      pt.push_back(t);
      pa.push_back(parse_double(fields[3]));
    }
  }
  TraceChannels channels;
  channels.cont_t_s = to_array(ct);
  channels.cont_dphi_rad = to_array(cd);
  channels.cont_atoms = to_array(ca);
  channels.pulsed_t_s = to_array(pt);
  channels.pulsed_atoms = to_array(pa);
  return channels;
}

nlohmann::json metadata_json(const SpectrumScan& scan) {
  return {{"record", "spectrum_scan"},
          {"n_atoms", scan.n_atoms},
          {"calibration", calibration_json(scan.calibration)},
          {"probe", probe_json(scan.probe)},
          {"noise", noise_json(scan.noise)}};
}

nlohmann::json metadata_json(const DecayTrace& trace) {
  return {{"record", "decay_trace"},
          {"n0", trace.n0},
          {"tau_s", trace.tau_s},
          {"decay",
           {{"duration_s", trace.config.duration_s},
            {"extra_loss_rate_per_s", trace.config.extra_loss_rate_per_s},
            {"pulsed_delays", trace.config.pulsed_delays},
            {"pulsed_averages", trace.config.pulsed_averages},
            {"pulsed_photons_per_atom", trace.config.pulsed_photons_per_atom},
            {"pulsed_scale_factor", trace.config.pulsed_scale_factor}}},
          {"calibration", calibration_json(trace.calibration)},
          {"probe", probe_json(trace.probe)},
          {"noise", noise_json(trace.noise)}};
}

void apply_metadata(SpectrumScan& scan, const nlohmann::json& metadata) {
  if (metadata.at("record").get<std::string>() != "spectrum_scan")
    throw std::invalid_argument("metadata does not describe a spectrum scan");
  scan.n_atoms = metadata.at("n_atoms").get<double>();
  scan.calibration = calibration_from_json(metadata.at("calibration"));
  scan.probe = probe_from_json(metadata.at("probe"));
  scan.noise = noise_from_json(metadata.at("noise"));
  scan.has_noise_metadata = true;
}

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json params, sigmas;
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    params[result.names[i]] = result.parameters(static_cast<Eigen::Index>(i));
    sigmas[result.names[i]] = result.uncertainties(static_cast<Eigen::Index>(i));
  }
  return {{"parameters", params},
          {"uncertainties", sigmas},
          {"residual_rms", result.residual_rms},
          {"converged", result.converged},
          {"iterations", result.iterations},
          {"status", result.status},
          {"mask_used",
           {{"points_used", result.points_used}, {"points_masked", result.points_masked}}},
          {"warnings", result.warnings}};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace nanofiber::io
