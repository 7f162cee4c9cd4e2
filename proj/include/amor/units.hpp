#pragma once

#include <numbers>

namespace amor::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double planck = 6.62607015e-34;        // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double boltzmann = 1.380649e-23;       // J/K
inline constexpr double zero_celsius = 273.15;          // K

inline constexpr double tesla_per_gauss = 1e-4;
inline constexpr double picotesla_per_gauss = 1e8;

/// Gyromagnetic ratio that maps 580 kHz onto 800 mG.
inline constexpr double gamma_default = 725.0e3;          // Hz/G
/// Textbook 87Rb F=2 ground-state value.
inline constexpr double gamma_rb87_f2 = 699.58e3;       // Hz/G

/// Rb number density anchor: 5.5e10 cm^-3 at 40.3 C.
inline constexpr double density_anchor_temperature = 40.3;  // C
inline constexpr double density_anchor = 5.5e10;            // cm^-3

inline constexpr double hz_to_rad(double hz) { return two_pi * hz; }
inline constexpr double rad_to_hz(double rad_s) { return rad_s / two_pi; }

}  // namespace amor::units
