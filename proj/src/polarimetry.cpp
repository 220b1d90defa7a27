#include "nanofiber/polarimetry.hpp"

#include <cmath>
#include <stdexcept>

namespace nanofiber {

namespace {
const std::complex<double> kI(0.0, 1.0);
}

JonesState JonesState::balanced(double power_w) {
  if (power_w < 0.0) throw std::invalid_argument("beam power must be >= 0");
  const double amp = std::sqrt(0.5 * power_w);
  return {Eigen::Vector2cd(amp, amp)};
}

JonesState propagate(const JonesState& input, const OpticalResponse& r) {
  JonesState out;
  out.amplitudes(0) = input.par() * r.t_par * std::exp(kI * r.phi_par);
  out.amplitudes(1) = input.perp() * r.t_perp * std::exp(kI * r.phi_perp);
  return out;
}

StokesVector stokes_vector(const JonesState& state) {
  const auto a = state.par();
  const auto b = state.perp();
  StokesVector s;
  s.s0 = std::norm(a) + std::norm(b);
  s.s1 = std::norm(a) - std::norm(b);
  s.s2 = 2.0 * std::real(a * std::conj(b));
  s.s3 = 2.0 * std::imag(a * std::conj(b));
  return s;
}

double stokes_s3(const JonesState& output) {
  // Powers behind the quarter waveplate + PBS: projections on the circular
  // basis states. Sign chosen so that phi_par > phi_perp gives S3 > 0.
  const double p_plus = 0.5 * std::norm(output.par() + kI * output.perp());
  const double p_minus = 0.5 * std::norm(output.par() - kI * output.perp());
  const double total = p_plus + p_minus;
  if (!(total > 0.0))
    throw std::invalid_argument("stokes_s3: zero-power state has no S3/S0");
  return (p_plus - p_minus) / total;
}

double extract_phi_par(double s3_over_s0, double asymmetry) {
  if (std::abs(s3_over_s0) > 1.0)
    throw std::domain_error("extract_phi_par: |S3/S0| exceeds 1");
  if (!(asymmetry > 1.0)) throw std::invalid_argument("asymmetry must exceed 1");
  return std::asin(s3_over_s0) / (1.0 - 1.0 / asymmetry);
}

double prefactor_error(double t_par, double asymmetry) {
  if (!(t_par > 0.0 && t_par <= 1.0))
    throw std::invalid_argument("t_par must be in (0, 1]");
  const double t_perp = std::pow(t_par, 1.0 / asymmetry);
  return 1.0 - 2.0 * t_par * t_perp / (t_par * t_par + t_perp * t_perp);
}

}  // namespace nanofiber
