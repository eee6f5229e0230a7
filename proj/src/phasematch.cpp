#include "kdpspdc/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kdpspdc/error.hpp"
#include "kdpspdc/roots.hpp"
#include "kdpspdc/units.hpp"

namespace kdpspdc {

SpdcConfig SpdcConfig::from_pump_signal(CrystalId crystal, double pump_um, double signal_um, double angle_deg,
                                        double length_mm) {
  const double idler_um = 1.0 / (1.0 / pump_um - 1.0 / signal_um);
  return {crystal, pump_um, signal_um, idler_um, angle_deg, length_mm};
}

SpdcConfig SpdcConfig::degenerate(CrystalId crystal, double pump_um, double angle_deg, double length_mm) {
  return {crystal, pump_um, 2.0 * pump_um, 2.0 * pump_um, angle_deg, length_mm};
}

void SpdcConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::validation, "SPDC configuration: " + why); };
  if (!(pump_um > 0.0 && signal_um > 0.0 && idler_um > 0.0)) fail("wavelengths must be positive");
  const double lhs = 1.0 / pump_um;
  const double rhs = 1.0 / signal_um + 1.0 / idler_um;
  if (std::abs(lhs - rhs) > 1e-12 * lhs) fail("energy conservation 1/λp = 1/λs + 1/λi violated");
  if (!(pump_um < signal_um && signal_um <= idler_um)) fail("expected λp < λs ≤ λi");
  if (!(angle_deg > 0.0 && angle_deg < 90.0)) fail("angle must lie in (0°, 90°)");
  if (!(length_mm > 0.0)) fail("crystal length must be positive");
}

std::string_view to_string(GvmType type) {
  switch (type) {
    case GvmType::gvm1: return "GVM1";
    case GvmType::gvm2: return "GVM2";
    case GvmType::gvm3: return "GVM3";
  }
  return "?";
}

double delta_k(const CrystalDatabase& db, CrystalId crystal, double pump_um, double signal_um, double idler_um,
               double angle_deg) {
  const double kp = db.index_e(crystal, pump_um, angle_deg) / pump_um;
  const double ks = db.index_o(crystal, signal_um) / signal_um;
  const double ki = db.index_e(crystal, idler_um, angle_deg) / idler_um;
  return 2.0 * pi * (kp - ks - ki);
}

double delta_k(const CrystalDatabase& db, const SpdcConfig& c) {
  return delta_k(db, c.crystal, c.pump_um, c.signal_um, c.idler_um, c.angle_deg);
}

std::optional<double> try_solve_angle(const CrystalDatabase& db, CrystalId crystal, double pump_um,
                                      double signal_um, double idler_um, double angle_tolerance) {
  auto f = [&](double phi) { return delta_k(db, crystal, pump_um, signal_um, idler_um, phi); };
  constexpr int intervals = 90;
  double prev_phi = 0.0;
  double prev = f(prev_phi);
  for (int i = 1; i <= intervals; ++i) {
    const double phi = 90.0 * i / intervals;
    const double cur = f(phi);
    if (prev == 0.0) return prev_phi;
    if ((prev < 0.0) != (cur < 0.0) || cur == 0.0) {
      roots::Options opt;
      opt.x_tolerance = angle_tolerance;
      opt.max_iterations = 400;
      return roots::refine(f, prev_phi, phi, prev, cur, opt);
    }
    prev_phi = phi;
    prev = cur;
  }
  return std::nullopt;
}

double solve_angle(const CrystalDatabase& db, CrystalId crystal, double pump_um, double signal_um, double idler_um,
                   double angle_tolerance) {
  if (auto phi = try_solve_angle(db, crystal, pump_um, signal_um, idler_um, angle_tolerance)) return *phi;
  std::ostringstream msg;
  msg << name(crystal) << ": Δk keeps one sign over [0°, 90°] for " << um_to_nm(pump_um) << " nm → "
      << um_to_nm(signal_um) << " nm + " << um_to_nm(idler_um) << " nm";
  throw Error(Errc::no_phase_matching, msg.str());
}

namespace {

struct GroupIndices {
  double pump, signal, idler;  // k' in s/m
};

GroupIndices group_indices(const CrystalDatabase& db, CrystalId crystal, double pump_um, double signal_um,
                           double idler_um, double angle_deg) {
  const auto e = Polarization::extraordinary(angle_deg);
  return {db.inverse_group_velocity(crystal, e, pump_um),
          db.inverse_group_velocity(crystal, Polarization::ordinary(), signal_um),
          db.inverse_group_velocity(crystal, e, idler_um)};
}

double combine(GvmType type, const GroupIndices& k) {
  switch (type) {
    case GvmType::gvm1: return k.pump - k.signal;
    case GvmType::gvm2: return k.pump - k.idler;
    case GvmType::gvm3: return 2.0 * k.pump - k.signal - k.idler;
  }
  return 0.0;
}

double ridge_from(const GroupIndices& k) {
  const double num = -(k.pump - k.signal);
  const double den = k.pump - k.idler;
  double theta = rad_to_deg(std::atan2(num, den));
  if (theta < 0.0) theta += 180.0;
  if (theta >= 180.0) theta -= 180.0;
  return theta + 0.0;  // no negative zero
}

bool indeterminate(const GroupIndices& k) {
  const double scale = std::abs(k.pump) * 1e-14;
  return std::abs(k.pump - k.signal) <= scale && std::abs(k.pump - k.idler) <= scale;
}

}  // namespace

double gvm_residual(const CrystalDatabase& db, CrystalId crystal, GvmType type, double pump_um, double signal_um,
                    double idler_um, double angle_deg) {
  return combine(type, group_indices(db, crystal, pump_um, signal_um, idler_um, angle_deg));
}

std::optional<double> ridge_angle(const CrystalDatabase& db, const SpdcConfig& c) {
  const auto k = group_indices(db, c.crystal, c.pump_um, c.signal_um, c.idler_um, c.angle_deg);
  if (indeterminate(k)) return std::nullopt;
  return ridge_from(k);
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Nested bracketing over one free wavelength `x`: the angle is re-solved from
// Δk = 0 at every evaluation, leaving a 1-D GVM residual in x.
template <class Wavelengths>
std::vector<GvmSolution> nested_solve(const CrystalDatabase& db, CrystalId crystal, GvmType type, double lo,
                                      double hi, double step, const SolverOptions& opt, Wavelengths wavelengths) {
  std::vector<GvmSolution> out;
  if (!(lo < hi)) return out;
  const auto& record = db.dispersive(crystal);
  auto inside = [&](double l) { return l > record.min_um() && l < record.max_um(); };

  auto residual = [&](double x) -> std::optional<double> {
    const auto [lp, ls, li] = wavelengths(x);
    if (!inside(lp) || !inside(ls) || !inside(li)) return std::nullopt;
    const auto phi = try_solve_angle(db, crystal, lp, ls, li, opt.angle_tolerance);
    if (!phi) return std::nullopt;
    return gvm_residual(db, crystal, type, lp, ls, li, *phi);
  };

  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  std::vector<double> nodes(count + 1);
  std::vector<std::optional<double>> values(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    nodes[i] = std::min(hi, lo + step * static_cast<double>(i));
    values[i] = residual(nodes[i]);
  }

  roots::Options ropt;
  ropt.x_tolerance = opt.wavelength_tolerance;
  for (const auto& [a, b] : roots::sign_changes(values)) {
    auto f = [&](double x) { return residual(x).value_or(nan); };
    const double x = roots::refine(f, nodes[a], nodes[b], *values[a], *values[b], ropt);
    const auto [lp, ls, li] = wavelengths(x);
    const auto phi = try_solve_angle(db, crystal, lp, ls, li, opt.angle_tolerance);
    if (!phi) continue;
    GvmSolution s;
    s.type = type;
    s.config = {crystal, lp, ls, li, *phi, opt.length_mm};
    s.residual_delta_k = delta_k(db, s.config);
    const auto k = group_indices(db, crystal, lp, ls, li, *phi);
    s.residual_gvm = combine(type, k);
    s.ridge_angle_deg = ridge_from(k);
    // A sign change across a discontinuity is not a root.
    if (std::abs(s.residual_delta_k) < opt.delta_k_tolerance && std::abs(s.residual_gvm) < opt.gvm_tolerance)
      out.push_back(s);
  }
  std::sort(out.begin(), out.end(),
            [](const GvmSolution& a, const GvmSolution& b) { return a.config.pump_um < b.config.pump_um; });
  return out;
}

}  // namespace

std::vector<GvmSolution> solve_gvm_degenerate_all(const CrystalDatabase& db, CrystalId crystal, GvmType type,
                                                  const SolverOptions& opt) {
  const auto& r = db.dispersive(crystal);
  const double lo = std::max(opt.scan_min_um, r.min_um() * (1.0 + 1e-9));
  const double hi = std::min(opt.scan_max_um, 0.5 * r.max_um() * (1.0 - 1e-9));
  struct Triple { double p, s, i; };
  return nested_solve(db, crystal, type, lo, hi, opt.scan_step_um, opt,
                      [](double lp) { return Triple{lp, 2.0 * lp, 2.0 * lp}; });
}

std::optional<GvmSolution> solve_gvm_degenerate(const CrystalDatabase& db, CrystalId crystal, GvmType type,
                                                const SolverOptions& opt, std::optional<double> near_pump_um) {
  auto all = solve_gvm_degenerate_all(db, crystal, type, opt);
  if (all.empty()) return std::nullopt;
  if (!near_pump_um) return all.front();
  return *std::min_element(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.config.pump_um - *near_pump_um) < std::abs(b.config.pump_um - *near_pump_um);
  });
}

std::vector<GvmSolution> solve_gvm_nondegenerate_all(const CrystalDatabase& db, CrystalId crystal, double pump_um,
                                                     const SolverOptions& opt) {
  db.dispersive(crystal);
  const double lo = std::max(opt.signal_min_um, pump_um * (1.0 + 1e-9));
  const double hi = std::min(opt.signal_max_um, 2.0 * pump_um);
  struct Triple { double p, s, i; };
  return nested_solve(db, crystal, GvmType::gvm1, lo, hi, opt.signal_step_um, opt, [pump_um](double ls) {
    return Triple{pump_um, ls, 1.0 / (1.0 / pump_um - 1.0 / ls)};
  });
}

std::optional<GvmSolution> solve_gvm_nondegenerate(const CrystalDatabase& db, CrystalId crystal, double pump_um,
                                                   const SolverOptions& opt) {
  auto all = solve_gvm_nondegenerate_all(db, crystal, pump_um, opt);
  if (all.empty()) return std::nullopt;
  return all.front();
}

const std::vector<double>& PmfGvmMap::residual(GvmType type) const {
  switch (type) {
    case GvmType::gvm1: return gvm1;
    case GvmType::gvm2: return gvm2;
    case GvmType::gvm3: return gvm3;
  }
  return gvm1;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return v;
}

}  // namespace

PmfGvmMap pmf_gvm_map(const CrystalDatabase& db, CrystalId crystal, double pump_min_um, double pump_max_um,
                      std::size_t pump_nodes, double angle_min_deg, double angle_max_deg, std::size_t angle_nodes) {
  const auto& r = db.dispersive(crystal);
  if (pump_nodes < 2 || angle_nodes < 2) throw Error(Errc::validation, "map needs at least 2 nodes per axis");
  if (!(pump_min_um < pump_max_um) || !(angle_min_deg < angle_max_deg))
    throw Error(Errc::validation, "map ranges must be ascending");
  if (!(pump_min_um > r.min_um() && 2.0 * pump_max_um < r.max_um())) {
    std::ostringstream msg;
    msg << name(crystal) << ": pump range [" << pump_min_um << ", " << pump_max_um
        << "] µm needs pump and 2×pump strictly inside [" << r.min_um() << ", " << r.max_um() << "] µm";
    throw Error(Errc::out_of_range, msg.str());
  }
  if (!(angle_min_deg >= 0.0 && angle_max_deg <= 90.0))
    throw Error(Errc::out_of_range, "map angle range must lie within [0°, 90°]");

  PmfGvmMap m;
  m.crystal = crystal;
  m.pump_um = linspace(pump_min_um, pump_max_um, pump_nodes);
  m.angle_deg = linspace(angle_min_deg, angle_max_deg, angle_nodes);
  const std::size_t total = pump_nodes * angle_nodes;
  m.delta_k.resize(total);
  m.gvm1.resize(total);
  m.gvm2.resize(total);
  m.gvm3.resize(total);
  for (std::size_t i = 0; i < pump_nodes; ++i) {
    const double lp = m.pump_um[i];
    for (std::size_t j = 0; j < angle_nodes; ++j) {
      const double phi = m.angle_deg[j];
      const auto k = group_indices(db, crystal, lp, 2.0 * lp, 2.0 * lp, phi);
      const std::size_t n = m.at(i, j);
      m.delta_k[n] = delta_k(db, crystal, lp, 2.0 * lp, 2.0 * lp, phi);
      m.gvm1[n] = combine(GvmType::gvm1, k);
      m.gvm2[n] = combine(GvmType::gvm2, k);
      m.gvm3[n] = combine(GvmType::gvm3, k);
    }
  }
  return m;
}

std::vector<std::pair<double, double>> map_crossings(const PmfGvmMap& m, GvmType type) {
  const auto& g = m.residual(type);
  auto changes = [](double a, double b, double c, double d) {
    const double lo = std::min({a, b, c, d});
    const double hi = std::max({a, b, c, d});
    return lo <= 0.0 && hi >= 0.0;
  };
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < m.pump_um.size(); ++i) {
    for (std::size_t j = 0; j + 1 < m.angle_deg.size(); ++j) {
      const std::size_t a = m.at(i, j), b = m.at(i + 1, j), c = m.at(i, j + 1), d = m.at(i + 1, j + 1);
      if (changes(m.delta_k[a], m.delta_k[b], m.delta_k[c], m.delta_k[d]) && changes(g[a], g[b], g[c], g[d]))
        out.emplace_back(0.5 * (m.pump_um[i] + m.pump_um[i + 1]), 0.5 * (m.angle_deg[j] + m.angle_deg[j + 1]));
    }
  }
  return out;
}

}  // namespace kdpspdc
