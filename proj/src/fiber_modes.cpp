#include "nanofiber/fiber_modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "nanofiber/bessel.hpp"
#include "nanofiber/constants.hpp"

namespace nanofiber {

namespace {

constexpr double kPi = constants::pi;

struct ModeParams {
  double u, w, Jr, Kr;  // Jr = J1'(u)/(u J1(u)), Kr = K1'(w)/(w K1(w))
};

ModeParams mode_params(const FiberGeometry& g, double n_eff) {
  const double k = g.wavenumber();
  const double beta = n_eff * k;
  const double h = std::sqrt(g.core_index * g.core_index * k * k - beta * beta);
  const double q = std::sqrt(beta * beta - g.cladding_index * g.cladding_index * k * k);
  const double u = h * g.radius;
  const double w = q * g.radius;
  return {u, w, bessel::dj1(u) / (u * bessel::j1(u)),
          bessel::dk1(w) / (w * bessel::k1(w))};
}

}  // namespace

double FiberGeometry::wavenumber() const { return 2.0 * kPi / wavelength; }

double FiberGeometry::v_number() const {
  return wavenumber() * radius *
         std::sqrt(core_index * core_index - cladding_index * cladding_index);
}

void FiberGeometry::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("fiber radius must be positive");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
  if (!(cladding_index >= 1.0))
    throw std::invalid_argument("cladding index must be >= 1");
  if (!(core_index > cladding_index))
    throw std::invalid_argument("core index must exceed cladding index");
  if (!std::isfinite(v_number()) || !(v_number() > 0.0))
    throw std::invalid_argument("V-number must be finite and positive");
}

double dispersion_residual(const FiberGeometry& g, double n_eff) {
  const auto p = mode_params(g, n_eff);
  const double n1 = g.core_index, n2 = g.cladding_index;
  const double inv = 1.0 / (p.u * p.u) + 1.0 / (p.w * p.w);
  return (p.Jr + p.Kr) * (n1 * n1 * p.Jr + n2 * n2 * p.Kr) -
         n_eff * n_eff * inv * inv;
}

namespace {

// Bisection refinement; returns NaN when the sign change turns out to be a
// pole of the dispersion relation instead of a root.
double refine_root(const FiberGeometry& g, double lo, double hi) {
  double flo = dispersion_residual(g, lo);
  for (int i = 0; i < 120 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = dispersion_residual(g, mid);
    if ((flo < 0.0) == (fmid < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  const double root = 0.5 * (lo + hi);
  return std::abs(dispersion_residual(g, root)) < 1e-8
             ? root
             : std::numeric_limits<double>::quiet_NaN();
}

// Field profile for arbitrary (possibly unnormalized) amplitudes.
ModeFieldProfile profile_raw(const ModeSolution& m, double r) {
  using std::complex;
  const double omega = constants::speed_of_light * m.geometry.wavenumber();
  const complex<double> i(0.0, 1.0);
  ModeFieldProfile f;
  if (r < m.geometry.radius) {
    const double x = m.h * r;
    const double J0 = bessel::j0(x), J2 = bessel::j2(x);
    const double J1 = bessel::j1(x);
    const double n1 = m.geometry.core_index;
    const double ee = omega * constants::vacuum_permittivity * n1 * n1 / (2.0 * m.h);
    f.e_r = i * m.beta / (2.0 * m.h) * m.amp_core * ((1.0 - m.s) * J0 - (1.0 + m.s) * J2);
    f.e_phi = -m.beta / (2.0 * m.h) * m.amp_core * ((1.0 - m.s) * J0 + (1.0 + m.s) * J2);
    f.e_z = m.amp_core * J1;
    f.h_r = ee * m.amp_core * ((1.0 - m.s_core) * J0 + (1.0 + m.s_core) * J2);
    f.h_phi = i * ee * m.amp_core * ((1.0 - m.s_core) * J0 - (1.0 + m.s_core) * J2);
    f.h_z = i * m.beta * m.s / (omega * constants::vacuum_permeability) * m.amp_core * J1;
  } else {
    const double y = m.q * r;
    const double K0 = bessel::k0(y), K2 = bessel::k2(y);
    const double K1 = bessel::k1(y);
    const double n2 = m.geometry.cladding_index;
    const double ee = omega * constants::vacuum_permittivity * n2 * n2 / (2.0 * m.q);
    f.e_r = i * m.beta / (2.0 * m.q) * m.amp_clad * ((1.0 - m.s) * K0 + (1.0 + m.s) * K2);
    f.e_phi = -m.beta / (2.0 * m.q) * m.amp_clad * ((1.0 - m.s) * K0 - (1.0 + m.s) * K2);
    f.e_z = m.amp_clad * K1;
    f.h_r = ee * m.amp_clad * ((1.0 - m.s_clad) * K0 - (1.0 + m.s_clad) * K2);
    f.h_phi = i * ee * m.amp_clad * ((1.0 - m.s_clad) * K0 + (1.0 + m.s_clad) * K2);
    f.h_z = i * m.beta * m.s / (omega * constants::vacuum_permeability) * m.amp_clad * K1;
  }
  return f;
}

double poynting_radial_mean(const ModeSolution& m, double r, int n_azimuth) {
  // The radial profile is azimuth-independent; only the cos^2/sin^2 factors
  // vary over the uniform grid.
  const auto f = profile_raw(m, r);
  const double x = std::real(f.e_r * std::conj(f.h_phi));
  const double y = std::real(f.e_phi * std::conj(f.h_r));
  double acc = 0.0;
  for (int j = 0; j < n_azimuth; ++j) {
    const double phi = 2.0 * kPi * j / n_azimuth;
    const double c = std::cos(phi), s = std::sin(phi);
    acc += c * c * x - s * s * y;
  }
  return acc / n_azimuth;
}

// Composite Simpson of 2*pi*r*<S_z>_phi over [r0, r1] with n panels.
double power_segment(const ModeSolution& m, double r0, double r1, int panels,
                     int n_azimuth) {
  const double dr = (r1 - r0) / panels;
  double acc = 0.0;
  auto f = [&](double r) {
    return 2.0 * kPi * r * poynting_radial_mean(m, r, n_azimuth);
  };
  for (int i = 0; i < panels; ++i) {
    const double a = r0 + i * dr;
    acc += dr / 6.0 * (f(a) + 4.0 * f(a + 0.5 * dr) + f(a + dr));
  }
  return acc;
}

double integrate_power(const ModeSolution& m, double rtol) {
  const double a = m.geometry.radius;
  const double tail = a + 40.0 / m.q;  // K1^2 drops ~e^{-80} over the tail
  const int n_azimuth = 16;
  double last = 0.0;
  for (int panels = 16; panels <= 4096; panels *= 2) {
    const double p = power_segment(m, 1e-4 * a, a, panels, n_azimuth) +
                     power_segment(m, a, tail, 2 * panels, n_azimuth);
    if (panels > 16 && std::abs(p - last) <= rtol * std::abs(p)) return p;
    last = p;
  }
  return last;
}

}  // namespace

ModeSolution solve_he11(const FiberGeometry& geometry) {
  geometry.validate();
  const double n_lo = geometry.cladding_index + 1e-4;
  const double n_hi = geometry.core_index - 1e-4;
  if (!(n_lo < n_hi)) throw SolverError("index contrast too small to bracket");

  // Uniform 2000-point scan plus geometric densification near the core-index
  // edge, where the fundamental root sits for thick fibers.
  std::vector<double> grid;
  grid.reserve(2200);
  for (int i = 0; i <= 2000; ++i)
    grid.push_back(n_lo + (n_hi - n_lo) * i / 2000.0);
  for (double d = (n_hi - n_lo) * 1e-3; d > 1e-8; d *= 0.5)
    grid.push_back(n_hi - d);
  std::sort(grid.begin(), grid.end());

  std::vector<double> roots;
  double prev_x = grid.front();
  double prev_f = dispersion_residual(geometry, prev_x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x = grid[i];
    const double f = dispersion_residual(geometry, x);
    if (std::isfinite(prev_f) && std::isfinite(f) && (prev_f < 0.0) != (f < 0.0)) {
      const double r = refine_root(geometry, prev_x, x);
      if (std::isfinite(r)) roots.push_back(r);
    }
    prev_x = x;
    prev_f = f;
  }
  if (roots.empty()) {
    std::ostringstream msg;
    msg << "no HE11 root in (" << n_lo << ", " << n_hi
        << "); V=" << geometry.v_number()
        << ", F(lo)=" << dispersion_residual(geometry, n_lo)
        << ", F(hi)=" << dispersion_residual(geometry, n_hi);
    throw SolverError(msg.str());
  }
  // The fundamental mode has the largest propagation constant.
  const double n_eff = *std::max_element(roots.begin(), roots.end());

  ModeSolution m;
  m.geometry = geometry;
  m.effective_index = n_eff;
  const double k = geometry.wavenumber();
  m.beta = n_eff * k;
  m.h = std::sqrt(geometry.core_index * geometry.core_index * k * k - m.beta * m.beta);
  m.q = std::sqrt(m.beta * m.beta - geometry.cladding_index * geometry.cladding_index * k * k);
  const auto p = mode_params(geometry, n_eff);
  m.s = (1.0 / (p.u * p.u) + 1.0 / (p.w * p.w)) / (p.Jr + p.Kr);
  m.s_core = m.s * n_eff * n_eff / (geometry.core_index * geometry.core_index);
  m.s_clad = m.s * n_eff * n_eff / (geometry.cladding_index * geometry.cladding_index);
  m.amp_core = 1.0;
  m.amp_clad = bessel::j1(p.u) / bessel::k1(p.w);

  const double raw_power = integrate_power(m, 1e-9);
  if (!(raw_power > 0.0)) throw SolverError("mode power normalization failed");
  m.amp_core /= std::sqrt(raw_power);
  m.amp_clad /= std::sqrt(raw_power);
  return m;
}

ModeFieldProfile field_profile(const ModeSolution& mode, double r) {
  return profile_raw(mode, r);
}

double poynting_z(const ModeSolution& mode, double r, double phi,
                  double polarization_axis) {
  const auto f = profile_raw(mode, r);
  const double c = std::cos(phi - polarization_axis);
  const double sn = std::sin(phi - polarization_axis);
  return c * c * std::real(f.e_r * std::conj(f.h_phi)) -
         sn * sn * std::real(f.e_phi * std::conj(f.h_r));
}

double guided_power(const ModeSolution& mode, double relative_tolerance) {
  return integrate_power(mode, relative_tolerance);
}

AzimuthalIntensity intensity_components(const ModeSolution& mode, double r) {
  const auto f = profile_raw(mode, r);
  const double er2 = std::norm(f.e_r), ep2 = std::norm(f.e_phi), ez2 = std::norm(f.e_z);
  const double scale = 0.5 * constants::speed_of_light * constants::vacuum_permittivity;
  return {scale * (er2 + ez2 + ep2), scale * (er2 + ez2 - ep2)};
}

double intensity_at(const ModeSolution& mode, double r, double phi,
                    double polarization_axis) {
  if (r < mode.geometry.radius)
    throw std::domain_error("intensity_at: r inside the fiber core");
  const auto c = intensity_components(mode, r);
  return c.mean + c.cos2 * std::cos(2.0 * (phi - polarization_axis));
}

double coupling_asymmetry(const ModeSolution& mode, const AtomGeometry& atom) {
  const double r = atom.radial_position(mode.geometry);
  const double par = intensity_at(mode, r, atom.azimuth_parallel, atom.azimuth_parallel);
  const double perp =
      intensity_at(mode, r, atom.azimuth_parallel, atom.azimuth_parallel + kPi / 2.0);
  return par / perp;
}

double effective_area(const ModeSolution& mode, const AtomGeometry& atom) {
  const double r = atom.radial_position(mode.geometry);
  return 1.0 / intensity_at(mode, r, atom.azimuth_parallel, atom.azimuth_parallel);
}

}  // namespace nanofiber
