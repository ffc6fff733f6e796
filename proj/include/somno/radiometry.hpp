#pragma once

#include <cmath>
#include <string>

#include "somno/errors.hpp"

namespace somno {

// Physical constants, shared by the radiometry model and the radar range
// equations.
inline constexpr double kSpeedOfLight = 3.0e8;  // m/s

// Blackbody radiometry parameters. Only emissivity varies per surface; the
// physical constants are fixed.
struct RadiometricParams {
  double emissivity = 0.98;

  static constexpr double sigma = 5.67e-8;    // W m^-2 K^-4
  static constexpr double planck_h = 6.63e-34;  // J s
  static constexpr double boltzmann_k = 1.38e-23;  // J / K
  static constexpr double c = kSpeedOfLight;       // m / s

  RadiometricParams() = default;
  explicit RadiometricParams(double eps) : emissivity(eps) { validate(); }

  void validate() const {
    if (!(emissivity > 0.0) || emissivity > 1.0)
      throw err::domain("emissivity must be in (0, 1]");
  }
};

// Spectral radiant exitance of a graybody, W m^-2 per meter of wavelength:
//   I(λ, T) = 2πεhc²/λ⁵ · 1/(e^{hc/(λkT)} − 1)
inline double spectral_exitance(double lambda_m, double temp_k,
                                const RadiometricParams& p = {}) {
  p.validate();
  if (!(lambda_m > 0.0)) throw err::domain("wavelength must be > 0");
  if (!(temp_k > 0.0)) throw err::domain("temperature must be > 0 K");
  const double hc = RadiometricParams::planck_h * RadiometricParams::c;
  const double numer = 2.0 * M_PI * p.emissivity * hc * RadiometricParams::c /
                       std::pow(lambda_m, 5);
  const double x = hc / (lambda_m * RadiometricParams::boltzmann_k * temp_k);
  return numer / std::expm1(x);
}

// Total radiant exitance, W m^-2: I(T) = εσT⁴.
inline double radiant_exitance(double temp_k,
                               const RadiometricParams& p = {}) {
  p.validate();
  if (temp_k < 0.0) throw err::domain("temperature must be >= 0 K");
  const double t2 = temp_k * temp_k;
  return p.emissivity * RadiometricParams::sigma * t2 * t2;
}

// Inverse of radiant_exitance: T = (I / εσ)^{1/4}.
inline double temperature_from_exitance(double exitance_w_m2,
                                        const RadiometricParams& p = {}) {
  p.validate();
  if (exitance_w_m2 < 0.0) throw err::domain("exitance must be >= 0");
  return std::pow(exitance_w_m2 / (p.emissivity * RadiometricParams::sigma),
                  0.25);
}

}  // namespace somno
