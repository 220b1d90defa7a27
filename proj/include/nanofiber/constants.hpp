// Physical constants and the default experiment parameters used across the
// simulator. Everything configurable at runtime starts from these values.
#pragma once

namespace nanofiber::constants {

// CODATA 2018
inline constexpr double speed_of_light = 299792458.0;            // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double vacuum_permeability = 1.25663706212e-6;  // H/m
inline constexpr double planck = 6.62607015e-34;                 // J s
inline constexpr double pi = 3.14159265358979323846;

/// Energy of one probe photon (J).
inline constexpr double photon_energy(double wavelength_m) {
  return planck * speed_of_light / wavelength_m;
}

// --- fiber and trap geometry -------------------------------------------
inline constexpr double fiber_radius = 250e-9;         // m (500 nm diameter)
inline constexpr double probe_wavelength = 852e-9;     // m (Cs D2)
inline constexpr double silica_index = 1.4525;         // fused silica at 852 nm (Sellmeier)
inline constexpr double vacuum_index = 1.0;
inline constexpr double atom_surface_distance = 230e-9;  // m, trap minimum to fiber surface

// --- Cs D2 line structure (F=4 -> F'), frequencies relative to F'=5 -----
inline constexpr double natural_linewidth_mhz = 5.2;   // Gamma/2pi
inline constexpr double line_offset_f4_mhz = -251.1;
inline constexpr double line_offset_f3_mhz = -452.4;
inline constexpr double strength_ratio_f3 = 7.0 / 44.0;   // sigma_3/sigma_5
inline constexpr double strength_ratio_f4 = 21.0 / 44.0;  // sigma_4/sigma_5

// --- ensemble calibration (reference experiment) -------------------------
inline constexpr double coupling_asymmetry = 2.8;      // I_par/I_perp at the atoms
inline constexpr double reference_atom_number = 1021.0;
inline constexpr double od_per_atom = 0.027356;        // eta = OD_par / N_at
inline constexpr double phi_max_reference = 6.98;      // rad, = OD_par/4 for N=1021

// --- probe / detection defaults ------------------------------------------
inline constexpr double probe_power = 5e-12;           // W
inline constexpr double scan_duration = 0.5e-3;        // s, full frequency scan
inline constexpr double quantum_efficiency = 0.5;      // APD at 852 nm (assumption)
inline constexpr int scan_averages = 128;
inline constexpr int pulsed_averages = 16;

}  // namespace nanofiber::constants
