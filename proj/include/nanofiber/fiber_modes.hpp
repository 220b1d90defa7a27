// Exact vector HE11 mode of a subwavelength step-index fiber: dispersion
// relation, evanescent field evaluation, coupling asymmetry between the two
// quasi-linear polarization eigenmodes, and effective mode area at the
// trapped-atom positions.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace nanofiber {

struct FiberGeometry {
  double radius;           ///< core radius (m)
  double core_index;       ///< silica at the probe wavelength
  double cladding_index;   ///< vacuum: 1.0
  double wavelength;       ///< probe wavelength (m)

  double wavenumber() const;  ///< 2*pi/wavelength (rad/m)
  double v_number() const;
  /// Throws std::invalid_argument when the geometry cannot guide a mode.
  void validate() const;
};

struct AtomGeometry {
  double surface_distance;        ///< m, from the fiber surface
  double azimuth_parallel = 0.0;  ///< atom plane angle w.r.t. the par-mode axis

  double radial_position(const FiberGeometry& g) const {
    return g.radius + surface_distance;
  }
};

/// HE11 mode solution, field coefficients normalized to 1 W guided power.
struct ModeSolution {
  FiberGeometry geometry;
  double beta;             ///< propagation constant (rad/m)
  double effective_index;  ///< beta / k
  double h;                ///< transverse wavenumber in the core (1/m)
  double q;                ///< evanescent decay constant (1/m)

  // Hybrid-mode shape parameters and Ez amplitudes (V/m at unit power).
  double s;
  double s_core;  ///< s * beta^2 / (n1 k)^2
  double s_clad;  ///< s * beta^2 / (n2 k)^2
  double amp_core;
  double amp_clad;

  double u() const { return h * geometry.radius; }
  double w() const { return q * geometry.radius; }
};

/// Radial profile of the quasi-circularly polarized mode at radius r; the
/// azimuthal factor exp(+-i phi) is left out. Units: V/m and A/m at 1 W.
struct ModeFieldProfile {
  std::complex<double> e_r, e_phi, e_z;
  std::complex<double> h_r, h_phi, h_z;
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact l=1 hybrid-mode dispersion relation in normalized units; the HE11
/// propagation constant is its root. Exposed so tests can sweep it directly.
double dispersion_residual(const FiberGeometry& geometry, double effective_index);

/// Solves for the fundamental HE11 mode (bracket scan + bisection) and
/// normalizes the fields to unit guided power.
ModeSolution solve_he11(const FiberGeometry& geometry);

/// Field components at radius r (either side of the core boundary).
ModeFieldProfile field_profile(const ModeSolution& mode, double r);

/// Axial Poynting density S_z (W/m^2) of the quasi-linear mode at (r, phi).
double poynting_z(const ModeSolution& mode, double r, double phi,
                  double polarization_axis = 0.0);

/// Cross-section integral of S_z by adaptive radial x uniform azimuthal
/// quadrature; equals 1 within the stated tolerance for a solved mode.
double guided_power(const ModeSolution& mode, double relative_tolerance = 1e-7);

/// I(r, phi) = mean + cos2 * cos(2 (phi - axis)) decomposition at radius r.
struct AzimuthalIntensity {
  double mean;
  double cos2;
};
AzimuthalIntensity intensity_components(const ModeSolution& mode, double r);

/// Evanescent intensity per unit guided power (1/m^2) of the quasi-linear
/// mode polarized along `polarization_axis`, evaluated at (r, phi).
/// Intensity is the free-space equivalent c*eps0*|E|^2/2. r < radius throws
/// std::domain_error (the interior map is out of scope).
double intensity_at(const ModeSolution& mode, double r, double phi,
                    double polarization_axis);

/// rho = I_par / I_perp at the atom position; > 1 for the HE11 mode.
double coupling_asymmetry(const ModeSolution& mode, const AtomGeometry& atom);

/// A_eff = 1 / intensity_at(r_atom, 0, axis=0) (m^2).
double effective_area(const ModeSolution& mode, const AtomGeometry& atom);

}  // namespace nanofiber
