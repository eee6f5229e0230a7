#pragma once

#include <numbers>

namespace kdpspdc {

inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double pi = std::numbers::pi;

// Wavelengths are micrometres internally; the CLI speaks nanometres.
constexpr double nm_to_um(double nm) { return nm * 1e-3; }
constexpr double um_to_nm(double um) { return um * 1e3; }
constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Angular frequency in rad/s of light with vacuum wavelength `wavelength_um`.
constexpr double angular_frequency(double wavelength_um) {
  return 2.0 * pi * speed_of_light / (wavelength_um * 1e-6);
}

}  // namespace kdpspdc
