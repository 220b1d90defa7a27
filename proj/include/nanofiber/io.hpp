// CSV and JSON serialization: scan/trace records with reproducibility
// metadata sidecars, and fit-result reports. CSV doubles use shortest
// round-trip formatting so read -> write cycles are byte-identical.
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nanofiber/inference.hpp"
#include "nanofiber/measurement_sim.hpp"

namespace nanofiber::io {

std::string format_double(double value);

std::string to_csv(const SpectrumScan& scan);
std::string to_csv(const DecayTrace& trace);

/// Parses the scan CSV schema (detuning_mhz,p_plus_w,p_minus_w,s3_norm).
/// The result carries no noise metadata until apply_metadata is called.
SpectrumScan scan_from_csv(const std::string& csv);

/// Parses the trace CSV schema (t_s,dphi_rad,atoms_cont,atoms_pulsed) into
/// per-channel time/value arrays (blank cells separate the channels).
struct TraceChannels {
  Eigen::ArrayXd cont_t_s, cont_dphi_rad, cont_atoms;
  Eigen::ArrayXd pulsed_t_s, pulsed_atoms;
};
TraceChannels trace_from_csv(const std::string& csv);
std::string to_csv(const TraceChannels& channels);

nlohmann::json metadata_json(const SpectrumScan& scan);
nlohmann::json metadata_json(const DecayTrace& trace);
void apply_metadata(SpectrumScan& scan, const nlohmann::json& metadata);

nlohmann::json to_json(const FitResult& result);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace nanofiber::io
