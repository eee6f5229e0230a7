#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kdpspdc/crystal_db.hpp"
#include "kdpspdc/phasematch.hpp"

namespace kdpspdc {

/// Gaussian pump: `center_um` is the pump wavelength, `bandwidth_um` the
/// wavelength bandwidth Δλ.
struct PumpSpec {
  double center_um = 0.0;
  double bandwidth_um = 0.0;

  /// σ_p = 2πcΔλ / (λ_c² − (Δλ/2)²), rad/s.
  double sigma_rad_per_s() const;
  void validate() const;
};

/// Symmetric axes; with an odd node count the middle node is exactly the centre.
struct GridSpec {
  double signal_center_um = 0.0;
  double signal_half_span_um = 0.0;
  std::size_t signal_nodes = 201;
  double idler_center_um = 0.0;
  double idler_half_span_um = 0.0;
  std::size_t idler_nodes = 201;
  std::vector<std::string> warnings;  // filled by auto_grid when it clips
};

/// Joint amplitude on a uniform wavelength grid; rows are signal nodes,
/// columns idler nodes.
struct SpectralGrid {
  std::vector<double> signal_um;
  std::vector<double> idler_um;
  Eigen::MatrixXcd amplitude;
  bool normalized = false;

  double signal_step() const;
  double idler_step() const;
  /// Σ|f|² Δλ_s Δλ_i
  double norm_squared() const;
  /// Throws Errc::validation unless both axes are strictly ascending and
  /// uniform to 1e-12 relative, and the matrix shape matches.
  void check_axes() const;
};

std::vector<double> uniform_axis(double center, double half_span, std::size_t nodes);
SpectralGrid make_grid(const GridSpec& spec);
void normalize(SpectralGrid& grid);

/// exp[−½((ω_s + ω_i − ω_p)/σ_p)²]
double pump_envelope(double signal_um, double idler_um, const PumpSpec& pump);

/// sinc(Δk L/2) with the pump wavelength implied by energy conservation and
/// the crystal, angle and length taken from `config`.
double phase_matching_amplitude(const CrystalDatabase& db, double signal_um, double idler_um,
                                const SpdcConfig& config);

/// PEF × PMF on the grid, L²-normalised.
SpectralGrid jsa(const CrystalDatabase& db, const SpdcConfig& config, const PumpSpec& pump, const GridSpec& spec);

struct SchmidtResult {
  std::vector<double> coefficients;  // descending, summing to 1
  double purity = 0.0;
  double schmidt_number = 0.0;
};

SchmidtResult schmidt(const Eigen::MatrixXcd& amplitude);
SchmidtResult schmidt(const SpectralGrid& grid);

struct Marginals {
  std::vector<double> signal;  // per µm
  std::vector<double> idler;
};

Marginals marginals(const SpectralGrid& grid);

/// Grid centred on the configuration's signal/idler wavelengths. The half span
/// of each axis is 4× the larger of the pump-envelope e^{-1/2} half-width and
/// the phase-matching first-zero distance along that axis; the latter is capped
/// at the envelope width plus the first-zero distance along the
/// energy-conserving line, which bounds the extent of the product.
GridSpec auto_grid(const CrystalDatabase& db, const SpdcConfig& config, const PumpSpec& pump,
                   std::size_t nodes = 201);

/// Linear interpolation of the signal axis onto `signal_um`; nodes outside the
/// source axis get zero amplitude. The result is renormalised.
SpectralGrid resample_signal(const SpectralGrid& grid, std::span<const double> signal_um);

}  // namespace kdpspdc
