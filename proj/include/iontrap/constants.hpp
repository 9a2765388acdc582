#pragma once

#include <numbers>

// Unit policy: SI throughout. Frequencies are angular (rad/s), energies in
// joules, lengths in meters, temperatures in kelvin. Only the CLI speaks Hz,
// nJ, um, us and mK, converting at the boundary.
namespace iontrap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double c = 299792458.0;                  // m/s
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double k_b = 1.380649e-23;               // J/K
inline constexpr double epsilon0 = 8.8541878128e-12;      // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double bohr_dipole = 8.4783536255e-30;   // e a0, C m

}  // namespace iontrap::constants
