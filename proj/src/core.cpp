#include "amor/core.hpp"

#include <cmath>
#include <string>

#include "amor/error.hpp"
#include "amor/units.hpp"

namespace amor {

double larmor_frequency(double bz_gauss, double gamma_hz_per_gauss) {
  return gamma_hz_per_gauss * std::abs(bz_gauss);
}

double larmor_angular(double bz_gauss, double gamma_hz_per_gauss) {
  return units::two_pi * gamma_hz_per_gauss * bz_gauss;
}

double rb_vapor_law_density(double temperature_c) {
  const double kelvin = temperature_c + units::zero_celsius;
  const double pressure_pa = 101325.0 * std::pow(10.0, 4.857 - 4215.0 / kelvin);
  return pressure_pa / (units::boltzmann * kelvin) * 1e-6;
}

double rb_number_density(double temperature_c) {
  if (!(temperature_c >= 20.0 && temperature_c <= 120.0)) {
    throw DomainError("rb_number_density: temperature " + std::to_string(temperature_c) +
                      " C outside [20, 120] C");
  }
  if (temperature_c == units::density_anchor_temperature) return units::density_anchor;
  const double scale =
      units::density_anchor / rb_vapor_law_density(units::density_anchor_temperature);
  return scale * rb_vapor_law_density(temperature_c);
}

double db_to_variance(double db) { return std::pow(10.0, db / 10.0); }

double variance_to_db(double variance) {
  if (!(variance > 0.0)) throw DomainError("variance_to_db: variance must be positive");
  return 10.0 * std::log10(variance);
}

}  // namespace amor
