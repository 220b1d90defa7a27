#include "nanofiber/atomic_medium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nanofiber/constants.hpp"

namespace nanofiber {

LineSystem LineSystem::cesium_d2(double phi_max, double global_offset_mhz) {
  LineSystem s;
  s.lines = {{3, constants::line_offset_f3_mhz, constants::strength_ratio_f3},
             {4, constants::line_offset_f4_mhz, constants::strength_ratio_f4},
             {5, 0.0, 1.0}};
  s.gamma_mhz = constants::natural_linewidth_mhz;
  s.phi_max = phi_max;
  s.global_offset_mhz = global_offset_mhz;
  return s;
}

LineSystem LineSystem::with_lines(std::initializer_list<int> f_primes) const {
  LineSystem out = *this;
  out.lines.clear();
  for (const auto& line : lines)
    if (std::find(f_primes.begin(), f_primes.end(), line.f_prime) != f_primes.end())
      out.lines.push_back(line);
  return out;
}

void LineSystem::validate() const {
  if (!(gamma_mhz > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(phi_max >= 0.0)) throw std::invalid_argument("phi_max must be >= 0");
  if (lines.empty()) throw std::invalid_argument("line system has no lines");
  double prev = -1e300;
  int prev_f = 0;
  for (const auto& line : lines) {
    const double expected = line.f_prime == 5   ? 1.0
                            : line.f_prime == 4 ? constants::strength_ratio_f4
                            : line.f_prime == 3 ? constants::strength_ratio_f3
                                                : -1.0;
    if (expected < 0.0) throw std::invalid_argument("unknown F' label");
    if (std::abs(line.strength_ratio - expected) > 1e-12)
      throw std::invalid_argument("strength ratio inconsistent with F' label");
    if (line.f_prime == 5 && line.frequency_offset_mhz != 0.0)
      throw std::invalid_argument("F'=5 must define the frequency origin");
    if (!(line.frequency_offset_mhz > prev) || line.f_prime <= prev_f)
      throw std::invalid_argument("lines must be ordered F'=3 < F'=4 < F'=5");
    prev = line.frequency_offset_mhz;
    prev_f = line.f_prime;
  }
}

double dispersive_phase(const LineSystem& system, double probe_mhz) {
  double total = 0.0;
  for (const auto& line : system.lines) {
    const double d = 2.0 * (probe_mhz - line.frequency_offset_mhz -
                            system.global_offset_mhz) / system.gamma_mhz;
    total += 2.0 * line.strength_ratio * d / (d * d + 1.0);
  }
  return -system.phi_max * total;
}

Eigen::ArrayXd dispersive_phase(const LineSystem& system, const Eigen::ArrayXd& probe_mhz) {
  return probe_mhz.unaryExpr([&](double nu) { return dispersive_phase(system, nu); });
}

double optical_density(const LineSystem& system, double probe_mhz) {
  double total = 0.0;
  for (const auto& line : system.lines) {
    const double d = 2.0 * (probe_mhz - line.frequency_offset_mhz -
                            system.global_offset_mhz) / system.gamma_mhz;
    total += line.strength_ratio / (d * d + 1.0);
  }
  return system.od_max() * total;
}

Eigen::ArrayXd optical_density(const LineSystem& system, const Eigen::ArrayXd& probe_mhz) {
  return probe_mhz.unaryExpr([&](double nu) { return optical_density(system, nu); });
}

OpticalResponse response_at(const LineSystem& system, double probe_mhz,
                            double asymmetry) {
  if (!(asymmetry > 1.0)) throw std::invalid_argument("asymmetry must exceed 1");
  OpticalResponse r;
  r.phi_par = dispersive_phase(system, probe_mhz);
  r.phi_perp = r.phi_par / asymmetry;
  const double od_par = optical_density(system, probe_mhz);
  r.t_par = std::exp(-0.5 * od_par);
  r.t_perp = std::exp(-0.5 * od_par / asymmetry);
  return r;
}

double scattering_rate(const LineSystem& system, double probe_power_w,
                       double detuning_mhz, double effective_area_m2,
                       double asymmetry, double sigma5_m2, double wavelength_m) {
  if (probe_power_w < 0.0) throw std::invalid_argument("probe power must be >= 0");
  double lorentz = 0.0;
  for (const auto& line : system.lines) {
    const double d = 2.0 * (detuning_mhz - line.frequency_offset_mhz -
                            system.global_offset_mhz) / system.gamma_mhz;
    lorentz += line.strength_ratio / (d * d + 1.0);
  }
  // Half the power per eigenmode; the perp mode couples 1/asymmetry as much.
  const double intensity = 0.5 * probe_power_w * (1.0 + 1.0 / asymmetry) / effective_area_m2;
  return sigma5_m2 * lorentz * intensity / constants::photon_energy(wavelength_m);
}

double atom_number_to_phi_max(double n_atoms, double eta) {
  if (n_atoms < 0.0) throw std::invalid_argument("atom number must be >= 0");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  return 0.25 * n_atoms * eta;
}

}  // namespace nanofiber
