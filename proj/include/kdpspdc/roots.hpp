#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace kdpspdc::roots {

struct Options {
  double x_tolerance = 1e-12;
  // Bisection shrinks the bracket to this fraction of its initial width
  // before the Illinois (bracketed secant) polish takes over.
  double secant_switch = 1e-3;
  int max_iterations = 200;
};

/// Refines a sign-change bracket [lo, hi] with f(lo)·f(hi) ≤ 0. The returned
/// point always stays inside the bracket.
template <class F>
double refine(F&& f, double lo, double hi, double f_lo, double f_hi, const Options& opt = {}) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  const double switch_width = std::abs(hi - lo) * opt.secant_switch;
  int it = 0;
  while (std::abs(hi - lo) > switch_width && std::abs(hi - lo) > opt.x_tolerance && it++ < opt.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  // Illinois variant of regula falsi: halve the retained end's value when the
  // same end is kept twice, so convergence stays superlinear.
  int side = 0;
  double x = 0.5 * (lo + hi);
  while (std::abs(hi - lo) > opt.x_tolerance && it++ < opt.max_iterations) {
    x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(x > std::min(lo, hi) && x < std::max(lo, hi))) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (f_lo < 0.0)) {
      const double step = std::abs(x - lo);
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
      if (step < opt.x_tolerance) break;
    } else {
      const double step = std::abs(hi - x);
      hi = x;
      f_hi = fx;
      if (side == +1) f_lo *= 0.5;
      side = +1;
      if (step < opt.x_tolerance) break;
    }
  }
  return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
}

/// Consecutive node pairs over which `values` changes sign. Nodes whose value
/// is missing (std::nullopt) break the chain.
inline std::vector<std::pair<std::size_t, std::size_t>> sign_changes(std::span<const std::optional<double>> values) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const auto& a = values[i];
    const auto& b = values[i + 1];
    if (!a || !b) continue;
    if ((*a < 0.0 && *b > 0.0) || (*a > 0.0 && *b < 0.0) || (*a == 0.0 && i == 0) || *b == 0.0)
      out.emplace_back(i, i + 1);
  }
  return out;
}

}  // namespace kdpspdc::roots
