// Bessel kernel for the fiber-mode computations: J0..J2, K0..K2 and first
// derivatives on positive real arguments. Backed by the C++17 special math
// functions; the test suite pins the accuracy to 1e-10 relative against
// high-precision reference values over the full argument range in use.
#pragma once

#include <cmath>
#include <stdexcept>

namespace nanofiber::bessel {

inline double j0(double x) { return std::cyl_bessel_j(0.0, x); }
inline double j1(double x) { return std::cyl_bessel_j(1.0, x); }
inline double j2(double x) { return std::cyl_bessel_j(2.0, x); }

inline double k0(double x) { return std::cyl_bessel_k(0.0, x); }
inline double k1(double x) { return std::cyl_bessel_k(1.0, x); }
inline double k2(double x) { return std::cyl_bessel_k(2.0, x); }

// Derivatives via the exact recurrences J0' = -J1, Jn' = (Jn-1 - Jn+1)/2,
// K0' = -K1, Kn' = -(Kn-1 + Kn+1)/2.
inline double dj0(double x) { return -j1(x); }
inline double dj1(double x) { return 0.5 * (j0(x) - j2(x)); }
inline double dj2(double x) { return 0.5 * (j1(x) - std::cyl_bessel_j(3.0, x)); }

inline double dk0(double x) { return -k1(x); }
inline double dk1(double x) { return -0.5 * (k0(x) + k2(x)); }
inline double dk2(double x) { return -0.5 * (k1(x) + std::cyl_bessel_k(3.0, x)); }

}  // namespace nanofiber::bessel
