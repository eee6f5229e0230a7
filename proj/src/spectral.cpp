#include "kdpspdc/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include "kdpspdc/error.hpp"
#include "kdpspdc/units.hpp"

namespace kdpspdc {

double PumpSpec::sigma_rad_per_s() const {
  const double center_m = center_um * 1e-6;
  const double bandwidth_m = bandwidth_um * 1e-6;
  return 2.0 * pi * speed_of_light * bandwidth_m / (center_m * center_m - 0.25 * bandwidth_m * bandwidth_m);
}

void PumpSpec::validate() const {
  if (!(bandwidth_um > 0.0 && bandwidth_um < center_um))
    throw Error(Errc::validation, "pump bandwidth must satisfy 0 < Δλ < λ_pump");
}

namespace {

double axis_step(const std::vector<double>& axis) {
  return axis.size() < 2 ? 0.0 : (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
}

void check_axis(const std::vector<double>& axis, const char* label) {
  if (axis.size() < 2) throw Error(Errc::validation, std::string(label) + " axis needs at least 2 nodes");
  const double h = axis_step(axis);
  if (!(h > 0.0)) throw Error(Errc::validation, std::string(label) + " axis must be strictly ascending");
  const double scale = std::max(std::abs(axis.front()), std::abs(axis.back()));
  for (std::size_t k = 0; k < axis.size(); ++k) {
    if (k > 0 && !(axis[k] > axis[k - 1]))
      throw Error(Errc::validation, std::string(label) + " axis must be strictly ascending");
    if (std::abs(axis[k] - (axis.front() + static_cast<double>(k) * h)) > 1e-12 * scale)
      throw Error(Errc::validation, std::string(label) + " axis is not uniform");
  }
}

}  // namespace

double SpectralGrid::signal_step() const { return axis_step(signal_um); }
double SpectralGrid::idler_step() const { return axis_step(idler_um); }

double SpectralGrid::norm_squared() const {
  return amplitude.cwiseAbs2().sum() * signal_step() * idler_step();
}

void SpectralGrid::check_axes() const {
  check_axis(signal_um, "signal");
  check_axis(idler_um, "idler");
  if (static_cast<std::size_t>(amplitude.rows()) != signal_um.size() ||
      static_cast<std::size_t>(amplitude.cols()) != idler_um.size())
    throw Error(Errc::validation, "amplitude matrix shape does not match the axes");
}

std::vector<double> uniform_axis(double center, double half_span, std::size_t nodes) {
  std::vector<double> axis(nodes);
  if (nodes == 1) {
    axis[0] = center;
    return axis;
  }
  const double h = 2.0 * half_span / static_cast<double>(nodes - 1);
  const double mid = 0.5 * static_cast<double>(nodes - 1);
  for (std::size_t k = 0; k < nodes; ++k) axis[k] = center + (static_cast<double>(k) - mid) * h;
  return axis;
}

SpectralGrid make_grid(const GridSpec& spec) {
  if (spec.signal_nodes < 2 || spec.idler_nodes < 2) throw Error(Errc::validation, "grid needs at least 2 nodes per axis");
  if (!(spec.signal_half_span_um > 0.0 && spec.idler_half_span_um > 0.0))
    throw Error(Errc::validation, "grid half spans must be positive");
  SpectralGrid g;
  g.signal_um = uniform_axis(spec.signal_center_um, spec.signal_half_span_um, spec.signal_nodes);
  g.idler_um = uniform_axis(spec.idler_center_um, spec.idler_half_span_um, spec.idler_nodes);
  if (!(g.signal_um.front() > 0.0 && g.idler_um.front() > 0.0))
    throw Error(Errc::validation, "grid extends to non-positive wavelengths");
  g.amplitude = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(spec.signal_nodes),
                                       static_cast<Eigen::Index>(spec.idler_nodes));
  return g;
}

void normalize(SpectralGrid& grid) {
  const double n2 = grid.norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw Error(Errc::degenerate_grid, "cannot normalise an all-zero grid");
  grid.amplitude /= std::sqrt(n2);
  grid.normalized = true;
}

double pump_envelope(double signal_um, double idler_um, const PumpSpec& pump) {
  const double detuning =
      angular_frequency(signal_um) + angular_frequency(idler_um) - angular_frequency(pump.center_um);
  const double x = detuning / pump.sigma_rad_per_s();
  return std::exp(-0.5 * x * x);
}

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

double half_phase(const CrystalDatabase& db, double signal_um, double idler_um, const SpdcConfig& c) {
  const double pump_um = 1.0 / (1.0 / signal_um + 1.0 / idler_um);
  const double length_um = c.length_mm * 1e3;
  return 0.5 * length_um * delta_k(db, c.crystal, pump_um, signal_um, idler_um, c.angle_deg);
}

}  // namespace

double phase_matching_amplitude(const CrystalDatabase& db, double signal_um, double idler_um,
                                const SpdcConfig& config) {
  return sinc(half_phase(db, signal_um, idler_um, config));
}

SpectralGrid jsa(const CrystalDatabase& db, const SpdcConfig& config, const PumpSpec& pump, const GridSpec& spec) {
  pump.validate();
  SpectralGrid g = make_grid(spec);
  for (std::size_t s = 0; s < g.signal_um.size(); ++s) {
    for (std::size_t i = 0; i < g.idler_um.size(); ++i) {
      const double ls = g.signal_um[s];
      const double li = g.idler_um[i];
      g.amplitude(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) =
          pump_envelope(ls, li, pump) * phase_matching_amplitude(db, ls, li, config);
    }
  }
  normalize(g);
  return g;
}

SchmidtResult schmidt(const Eigen::MatrixXcd& amplitude) {
  if (amplitude.size() == 0 || !(amplitude.cwiseAbs2().sum() > 0.0))
    throw Error(Errc::degenerate_grid, "Schmidt decomposition of an all-zero amplitude");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(amplitude);
  const auto& sv = svd.singularValues();
  SchmidtResult r;
  r.coefficients.resize(static_cast<std::size_t>(sv.size()));
  double total = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) total += sv[k] * sv[k];
  for (Eigen::Index k = 0; k < sv.size(); ++k) r.coefficients[static_cast<std::size_t>(k)] = sv[k] * sv[k] / total;
  std::sort(r.coefficients.begin(), r.coefficients.end(), std::greater<>());
  for (double c : r.coefficients) r.purity += c * c;
  r.schmidt_number = 1.0 / r.purity;
  return r;
}

SchmidtResult schmidt(const SpectralGrid& grid) {
  grid.check_axes();
  return schmidt(grid.amplitude);
}

Marginals marginals(const SpectralGrid& grid) {
  const Eigen::MatrixXd p = grid.amplitude.cwiseAbs2();
  const Eigen::VectorXd rows = p.rowwise().sum() * grid.idler_step();
  const Eigen::VectorXd cols = p.colwise().sum().transpose() * grid.signal_step();
  return {{rows.data(), rows.data() + rows.size()}, {cols.data(), cols.data() + cols.size()}};
}

namespace {

constexpr double capture_target = 0.999;
constexpr int max_growth_steps = 8;

// Keeps every node, and the pump wavelength it implies, inside the range.
// Clipping is symmetric so the centre node stays exact. Returns true when
// anything had to give.
bool fit_to_range(GridSpec& spec, const CrystalRecord& record) {
  const double lo = record.min_um();
  const double hi = record.max_um();
  bool changed = false;
  auto clip = [&](double center, double& half, const char* label) {
    const double limit = std::min(center - lo, hi - center) * (1.0 - 1e-9);
    if (half > limit) {
      std::ostringstream msg;
      msg << label << " half span clipped from " << um_to_nm(half) << " nm to " << um_to_nm(limit)
          << " nm by the dispersion range";
      spec.warnings.push_back(msg.str());
      half = limit;
      changed = true;
    }
  };
  const double s0 = spec.signal_center_um;
  const double i0 = spec.idler_center_um;
  clip(s0, spec.signal_half_span_um, "signal");
  clip(i0, spec.idler_half_span_um, "idler");
  const double min_pump = 1.0 / (1.0 / (s0 - spec.signal_half_span_um) + 1.0 / (i0 - spec.idler_half_span_um));
  if (min_pump < lo) {
    // Shrink both axes by the same factor until the shortest implied pump fits.
    double f_lo = 0.0, f_hi = 1.0;
    for (int k = 0; k < 60; ++k) {
      const double f = 0.5 * (f_lo + f_hi);
      const double p = 1.0 / (1.0 / (s0 - f * spec.signal_half_span_um) + 1.0 / (i0 - f * spec.idler_half_span_um));
      if (p >= lo) f_lo = f; else f_hi = f;
    }
    spec.signal_half_span_um *= f_lo;
    spec.idler_half_span_um *= f_lo;
    spec.warnings.push_back("grid spans shrunk so the implied pump wavelength stays inside the dispersion range");
    changed = true;
  }
  return changed;
}

// Odd node count giving roughly the spacing of `nodes` over a span `ratio`
// times larger.
std::size_t odd_nodes(std::size_t nodes, double ratio) {
  const auto half = static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(nodes - 1) * ratio));
  return 2 * std::max<std::size_t>(half, 1) + 1;
}

// Fraction of |f|² lying inside the window of `inner`.
double capture(const SpectralGrid& g, const GridSpec& inner) {
  const double tol = 1e-12;
  double in = 0.0, total = 0.0;
  for (Eigen::Index s = 0; s < g.amplitude.rows(); ++s) {
    const bool s_in = std::abs(g.signal_um[static_cast<std::size_t>(s)] - inner.signal_center_um) <=
                      inner.signal_half_span_um * (1.0 + tol);
    for (Eigen::Index i = 0; i < g.amplitude.cols(); ++i) {
      const double w = std::norm(g.amplitude(s, i));
      total += w;
      if (s_in && std::abs(g.idler_um[static_cast<std::size_t>(i)] - inner.idler_center_um) <=
                      inner.idler_half_span_um * (1.0 + tol))
        in += w;
    }
  }
  return in / total;
}

constexpr double scan_step_um = 1e-5;
constexpr double scan_limit_um = 0.5;

// Smallest offset d at which excess(d) ≥ 0, bisected to 1e-9 µm. Stops
// (nullopt) when excess is unavailable, e.g. the wavelength left the
// dispersion range.
std::optional<double> first_crossing(const std::function<std::optional<double>(double)>& excess) {
  double prev = 0.0;
  for (double d = scan_step_um; d <= scan_limit_um; d += scan_step_um) {
    const auto v = excess(d);
    if (!v) return std::nullopt;
    if (*v >= 0.0) {
      double lo = prev, hi = d;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        const auto m = excess(mid);
        if (m && *m >= 0.0) hi = mid; else lo = mid;
      }
      return hi;
    }
    prev = d;
  }
  return std::nullopt;
}

std::optional<double> widest(std::optional<double> a, std::optional<double> b) {
  if (a && b) return std::max(*a, *b);
  return a ? a : b;
}

}  // namespace

GridSpec auto_grid(const CrystalDatabase& db, const SpdcConfig& config, const PumpSpec& pump, std::size_t nodes) {
  pump.validate();
  const auto& record = db.dispersive(config.crystal);
  const double s0 = config.signal_um;
  const double i0 = config.idler_um;
  const double x0 = half_phase(db, s0, i0, config);
  const double threshold = std::exp(-0.5);

  auto pmf_excess = [&](double ls, double li) -> std::optional<double> {
    try {
      return std::abs(half_phase(db, ls, li, config) - x0) - pi;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  struct AxisWidths {
    std::optional<double> envelope, pmf;
  };
  auto axis_widths = [&](bool signal_axis) {
    AxisWidths w;
    for (double sign : {+1.0, -1.0}) {
      auto at = [&](double d) {
        return signal_axis ? std::pair{s0 + sign * d, i0} : std::pair{s0, i0 + sign * d};
      };
      w.envelope = widest(w.envelope, first_crossing([&](double d) -> std::optional<double> {
        const auto [ls, li] = at(d);
        if (!(ls > 0.0 && li > 0.0)) return std::nullopt;
        return threshold - pump_envelope(ls, li, pump);
      }));
      w.pmf = widest(w.pmf, first_crossing([&](double d) {
        const auto [ls, li] = at(d);
        return pmf_excess(ls, li);
      }));
    }
    return w;
  };

  // First zero along 1/λs + 1/λi = const, projected on each axis.
  const double inv_sum = 1.0 / s0 + 1.0 / i0;
  std::optional<double> along_s, along_i;
  for (double sign : {+1.0, -1.0}) {
    const auto d = first_crossing([&](double dd) -> std::optional<double> {
      const double ls = s0 + sign * dd;
      const double inv_li = inv_sum - 1.0 / ls;
      if (!(inv_li > 0.0)) return std::nullopt;
      return pmf_excess(ls, 1.0 / inv_li);
    });
    if (d) {
      const double ls = s0 + sign * *d;
      along_s = widest(along_s, std::abs(ls - s0));
      along_i = widest(along_i, std::abs(1.0 / (inv_sum - 1.0 / ls) - i0));
    }
  }

  auto half_span = [&](const AxisWidths& w, std::optional<double> along, const char* label) {
    if (!w.envelope) throw Error(Errc::out_of_range, std::string("pump envelope width along the ") + label +
                                                         " axis could not be bracketed inside the dispersion range");
    double pmf = w.pmf.value_or(0.0);
    if (along) pmf = std::min(w.pmf.value_or(*w.envelope + *along), *w.envelope + *along);
    return 4.0 * std::max(*w.envelope, pmf);
  };

  GridSpec base;
  base.signal_center_um = s0;
  base.idler_center_um = i0;
  base.signal_nodes = nodes;
  base.idler_nodes = nodes;
  base.signal_half_span_um = half_span(axis_widths(true), along_s, "signal");
  base.idler_half_span_um = half_span(axis_widths(false), along_i, "idler");

  // Sinc side lobes along the energy line are not damped by the pump, so the
  // window grows until it holds capture_target of the norm of a grid twice
  // its size, or the dispersion range stops it.
  GridSpec spec;
  for (int step = 0;; ++step) {
    const double grow = std::pow(std::sqrt(2.0), step);
    spec = base;
    spec.signal_half_span_um *= grow;
    spec.idler_half_span_um *= grow;
    const bool clipped = fit_to_range(spec, record);

    GridSpec ref = spec;
    ref.signal_half_span_um *= 2.0;
    ref.idler_half_span_um *= 2.0;
    ref.warnings.clear();
    const bool ref_clipped = fit_to_range(ref, record);
    ref.signal_nodes = odd_nodes(nodes, ref.signal_half_span_um / spec.signal_half_span_um);
    ref.idler_nodes = odd_nodes(nodes, ref.idler_half_span_um / spec.idler_half_span_um);
    const double captured = capture(jsa(db, config, pump, ref), spec);

    if (captured >= capture_target && !ref_clipped) break;
    if (clipped || ref_clipped || step == max_growth_steps) {
      std::ostringstream msg;
      msg << "grid holds " << captured << " of the norm of a " << (ref_clipped ? "range-limited " : "")
          << "reference twice its size";
      spec.warnings.push_back(msg.str());
      break;
    }
  }
  return spec;
}

SpectralGrid resample_signal(const SpectralGrid& grid, std::span<const double> signal_um) {
  grid.check_axes();
  SpectralGrid out;
  out.signal_um.assign(signal_um.begin(), signal_um.end());
  out.idler_um = grid.idler_um;
  out.amplitude = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(signal_um.size()), grid.amplitude.cols());
  const double x0 = grid.signal_um.front();
  const double h = grid.signal_step();
  const auto last = static_cast<double>(grid.signal_um.size() - 1);
  for (std::size_t r = 0; r < signal_um.size(); ++r) {
    double t = (signal_um[r] - x0) / h;
    if (t < -1e-9 || t > last + 1e-9) continue;
    t = std::clamp(t, 0.0, last);  // nodes shared with the source axis land exactly
    const auto k = static_cast<Eigen::Index>(std::min(std::floor(t), last - 1.0));
    const double w = t - static_cast<double>(k);
    out.amplitude.row(static_cast<Eigen::Index>(r)) =
        (1.0 - w) * grid.amplitude.row(k) + w * grid.amplitude.row(k + 1);
  }
  normalize(out);
  return out;
}

}  // namespace kdpspdc
