#pragma once

#include <complex>
#include <numbers>

namespace nc {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double c0 = 299792458.0;          // m/s
inline constexpr double eps0 = 8.8541878128e-12;   // F/m
inline constexpr double mu0 = 1.25663706212e-6;    // H/m
inline constexpr double eta0 = 376.730313668;      // ohm
inline constexpr double hbar_over_e = 6.582119569e-16;  // eV·s

inline constexpr Complex I{0.0, 1.0};

// Internal unit system: lengths in nm, c = 1, so time is measured in nm/c and
// angular frequency in rad per (nm/c). Fields carry H scaled by eta0.

/// Angular frequency in internal units for a vacuum wavelength in nm.
constexpr double omega_internal(double lambda_nm) { return 2.0 * pi / lambda_nm; }

/// rad/s -> rad per (nm/c)
constexpr double to_internal_rate(double rad_per_s) { return rad_per_s * 1e-9 / c0; }
constexpr double from_internal_rate(double rate) { return rate * c0 / 1e-9; }

constexpr double omega_si(double lambda_nm) { return 2.0 * pi * c0 / (lambda_nm * 1e-9); }

constexpr double ev_to_rad_per_s(double ev) { return ev / hbar_over_e; }
constexpr double rad_per_s_to_ev(double w) { return w * hbar_over_e; }

constexpr double nm_from_ev(double ev) { return 1239.84198 / ev; }

/// Internal time unit (nm/c) in femtoseconds.
inline constexpr double fs_per_internal_time = 1e-9 / c0 * 1e15;

/// Converts an integral of E·H' over an area in nm^2 (H' = eta0·H) into watts.
inline constexpr double watts_per_internal_power = 1e-18 / eta0;

inline constexpr double db_per_neper_power = 4.342944819032518;  // 10·log10(e)

}  // namespace nc
