#pragma once

namespace amor {

/// Larmor precession frequency gamma * |Bz| in Hz. The sign of Bz is kept by
/// callers that need the precession sense.
double larmor_frequency(double bz_gauss, double gamma_hz_per_gauss);

/// Signed angular Larmor frequency 2 pi gamma Bz, rad/s.
double larmor_angular(double bz_gauss, double gamma_hz_per_gauss);

/// Rb vapor number density in cm^-3, valid for 20..120 C.
///
/// Uses the liquid-phase vapor-pressure law log10(P/atm) = 4.857 - 4215/T over
/// the whole range (it stays smooth across the 39.3 C melting point) and
/// rescales it by one constant so the density at 40.3 C is exactly 5.5e10.
double rb_number_density(double temperature_c);

/// Unscaled ideal-gas density from the vapor-pressure law, cm^-3.
double rb_vapor_law_density(double temperature_c);

double db_to_variance(double db);
double variance_to_db(double variance);

}  // namespace amor
