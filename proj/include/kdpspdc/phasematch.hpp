#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "kdpspdc/crystal_db.hpp"

namespace kdpspdc {

/// Collinear type-II (e → o + e) down-conversion: pump and idler are
/// extraordinary rays at `angle_deg` from the optic axis, the signal is ordinary.
struct SpdcConfig {
  CrystalId crystal = CrystalId::KDP;
  double pump_um = 0.0;
  double signal_um = 0.0;
  double idler_um = 0.0;
  double angle_deg = 0.0;
  double length_mm = 1.0;

  /// Idler from energy conservation.
  static SpdcConfig from_pump_signal(CrystalId crystal, double pump_um, double signal_um, double angle_deg,
                                     double length_mm);
  static SpdcConfig degenerate(CrystalId crystal, double pump_um, double angle_deg, double length_mm);

  /// Throws Errc::validation if energy conservation, ordering λ_p < λ_s ≤ λ_i,
  /// 0° < φ < 90° or L > 0 fail.
  void validate() const;
};

enum class GvmType { gvm1 = 1, gvm2 = 2, gvm3 = 3 };
std::string_view to_string(GvmType type);

struct GvmSolution {
  GvmType type = GvmType::gvm1;
  SpdcConfig config;
  double residual_delta_k = 0.0;  // rad/µm
  double residual_gvm = 0.0;      // s/m
  double ridge_angle_deg = 0.0;
};

struct SolverOptions {
  double delta_k_tolerance = 1e-6;     // rad/µm
  double gvm_tolerance = 1e-13;        // s/m
  double wavelength_tolerance = 1e-9;  // µm, bracket width at which refinement stops
  double angle_tolerance = 1e-10;      // degrees
  double scan_min_um = 0.35;           // degenerate pump scan
  double scan_max_um = 1.0;
  double scan_step_um = 0.005;
  double signal_min_um = 0.5;          // non-degenerate signal scan
  double signal_max_um = 0.9;
  double signal_step_um = 0.0025;
  double length_mm = 15.0;             // carried into returned configs
};

/// Δk = 2π[n_e(λ_p,φ)/λ_p − n_o(λ_s)/λ_s − n_e(λ_i,φ)/λ_i] in rad/µm.
double delta_k(const CrystalDatabase& db, CrystalId crystal, double pump_um, double signal_um, double idler_um,
               double angle_deg);
double delta_k(const CrystalDatabase& db, const SpdcConfig& config);

/// Phase-matching angle in degrees; throws Errc::no_phase_matching when Δk
/// keeps one sign over [0°, 90°].
double solve_angle(const CrystalDatabase& db, CrystalId crystal, double pump_um, double signal_um, double idler_um,
                   double angle_tolerance = 1e-10);
std::optional<double> try_solve_angle(const CrystalDatabase& db, CrystalId crystal, double pump_um,
                                      double signal_um, double idler_um, double angle_tolerance = 1e-10);

/// GVM₁: k'_p − k'_s, GVM₂: k'_p − k'_i, GVM₃: 2k'_p − k'_s − k'_i (s/m).
double gvm_residual(const CrystalDatabase& db, CrystalId crystal, GvmType type, double pump_um, double signal_um,
                    double idler_um, double angle_deg);

/// PMF ridge orientation θ ∈ [0°, 180°) in the (ω_s, ω_i) plane from
/// tan θ = −(k'_p − k'_s)/(k'_p − k'_i); nullopt when both differences vanish.
std::optional<double> ridge_angle(const CrystalDatabase& db, const SpdcConfig& config);

/// Every simultaneous root of {Δk = 0, GVM residual = 0} with λ_s = λ_i = 2λ_p,
/// sorted by pump wavelength. Empty means "not satisfied".
std::vector<GvmSolution> solve_gvm_degenerate_all(const CrystalDatabase& db, CrystalId crystal, GvmType type,
                                                  const SolverOptions& options = {});
/// Root nearest `near_pump_um` (the first one when not given).
std::optional<GvmSolution> solve_gvm_degenerate(const CrystalDatabase& db, CrystalId crystal, GvmType type,
                                                const SolverOptions& options = {},
                                                std::optional<double> near_pump_um = std::nullopt);

/// GVM₁ roots over the signal wavelength at fixed pump, idler by energy
/// conservation.
std::vector<GvmSolution> solve_gvm_nondegenerate_all(const CrystalDatabase& db, CrystalId crystal, double pump_um,
                                                     const SolverOptions& options = {});
std::optional<GvmSolution> solve_gvm_nondegenerate(const CrystalDatabase& db, CrystalId crystal, double pump_um,
                                                   const SolverOptions& options = {});

/// Dense degenerate-configuration sampling for contour maps. Node (i, j) is
/// pump wavelength i, angle j; arrays are row-major in that order.
struct PmfGvmMap {
  CrystalId crystal = CrystalId::KDP;
  std::vector<double> pump_um;
  std::vector<double> angle_deg;
  std::vector<double> delta_k;  // rad/µm
  std::vector<double> gvm1;     // s/m
  std::vector<double> gvm2;
  std::vector<double> gvm3;

  std::size_t at(std::size_t i, std::size_t j) const { return i * angle_deg.size() + j; }
  const std::vector<double>& residual(GvmType type) const;
};

PmfGvmMap pmf_gvm_map(const CrystalDatabase& db, CrystalId crystal, double pump_min_um, double pump_max_um,
                      std::size_t pump_nodes, double angle_min_deg, double angle_max_deg, std::size_t angle_nodes);

/// Grid cells where both Δk and the chosen GVM residual change sign; the
/// returned points are cell centres (pump µm, angle deg).
std::vector<std::pair<double, double>> map_crossings(const PmfGvmMap& map, GvmType type);

}  // namespace kdpspdc
