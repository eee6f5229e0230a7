#include "kdpspdc/hom.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "kdpspdc/error.hpp"
#include "kdpspdc/units.hpp"

namespace kdpspdc {

namespace {

constexpr double norm_tolerance = 1e-6;
constexpr double plateau_tolerance = 1e-3;

void require_normalized(const SpectralGrid& g, const char* label) {
  g.check_axes();
  const double n2 = g.norm_squared();
  if (std::abs(n2 - 1.0) > norm_tolerance)
    throw Error(Errc::unnormalized, std::string(label) + " has squared norm " + std::to_string(n2));
}

}  // namespace

HomCurve hom_fourfold(const SpectralGrid& f1, const SpectralGrid& f2, std::span<const double> delays_s) {
  require_normalized(f1, "first grid");
  require_normalized(f2, "second grid");
  if (f1.signal_um.size() != f2.signal_um.size())
    throw Error(Errc::mismatched_axes, "signal axes differ in length");
  for (std::size_t k = 0; k < f1.signal_um.size(); ++k) {
    if (std::abs(f1.signal_um[k] - f2.signal_um[k]) > 1e-12 * std::abs(f1.signal_um[k]))
      throw Error(Errc::mismatched_axes, "signal axes differ at node " + std::to_string(k));
  }

  const double ds = f1.signal_step();
  const Eigen::MatrixXcd g = f1.amplitude * f1.amplitude.adjoint() * f1.idler_step();
  const Eigen::MatrixXcd h = f2.amplitude * f2.amplitude.adjoint() * f2.idler_step();
  // m(s₁,s₂) = G(s₂,s₁) H(s₁,s₂)
  const Eigen::MatrixXcd m = g.transpose().cwiseProduct(h) * (ds * ds);

  const auto n = static_cast<Eigen::Index>(f1.signal_um.size());
  Eigen::VectorXd omega(n);
  for (Eigen::Index k = 0; k < n; ++k) omega[k] = angular_frequency(f1.signal_um[static_cast<std::size_t>(k)]);
  // Phases relative to the centre keep the exponent small.
  const double omega0 = omega[n / 2];

  HomCurve curve;
  curve.delays_s.assign(delays_s.begin(), delays_s.end());
  curve.probability.reserve(delays_s.size());
  Eigen::VectorXcd u(n);
  for (double tau : delays_s) {
    for (Eigen::Index k = 0; k < n; ++k) u[k] = std::polar(1.0, (omega[k] - omega0) * tau);
    const std::complex<double> overlap = u.transpose() * m * u.conjugate();
    curve.probability.push_back(0.5 * (1.0 - overlap.real()));
  }
  try {
    curve.visibility = visibility(curve);
    curve.baseline = baseline(curve);
  } catch (const Error& e) {
    if (e.code() != Errc::delay_range_too_narrow) throw;
  }
  return curve;
}

double baseline(const HomCurve& curve) {
  const std::size_t n = curve.probability.size();
  if (n < 2) throw Error(Errc::delay_range_too_narrow, "curve needs at least two delays");
  const std::size_t edge = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n))));
  double sum = 0.0;
  for (std::size_t k = 0; k < edge; ++k) sum += curve.probability[k] + curve.probability[n - 1 - k];
  return sum / static_cast<double>(2 * edge);
}

double visibility(const HomCurve& curve) {
  if (curve.probability.size() < 2) throw Error(Errc::delay_range_too_narrow, "curve needs at least two delays");
  for (double end : {curve.probability.front(), curve.probability.back()}) {
    if (std::abs(end - 0.5) > plateau_tolerance)
      throw Error(Errc::delay_range_too_narrow,
                  "P at the outermost delay is " + std::to_string(end) + ", not within 1e-3 of 1/2");
  }
  const double b = baseline(curve);
  const double lowest = *std::min_element(curve.probability.begin(), curve.probability.end());
  return (b - lowest) / b;
}

std::vector<double> default_delays(const SpectralGrid& grid, std::size_t nodes, double factor) {
  grid.check_axes();
  if (nodes < 3) throw Error(Errc::validation, "need at least 3 delays");
  const auto m = marginals(grid).signal;
  const auto peak_it = std::max_element(m.begin(), m.end());
  if (!(*peak_it > 0.0)) throw Error(Errc::degenerate_grid, "signal marginal is zero");
  const auto peak = static_cast<std::size_t>(peak_it - m.begin());
  const double level = *peak_it * std::exp(-0.5);

  // Linear interpolation of the level crossing on each side; the grid edge
  // is used when the marginal never drops that low.
  auto crossing = [&](int dir) {
    std::size_t k = peak;
    while (true) {
      const bool at_edge = dir > 0 ? k + 1 >= m.size() : k == 0;
      if (at_edge) return grid.signal_um[k];
      const std::size_t next = dir > 0 ? k + 1 : k - 1;
      if (m[next] < level) {
        const double t = (m[k] - level) / (m[k] - m[next]);
        return grid.signal_um[k] + t * (grid.signal_um[next] - grid.signal_um[k]);
      }
      k = next;
    }
  };
  const double half_width_um = 0.5 * (crossing(+1) - crossing(-1));
  const double lambda_um = grid.signal_um[peak];
  const double sigma_omega = 2.0 * pi * speed_of_light * half_width_um * 1e-6 / (lambda_um * lambda_um * 1e-12);
  if (!(sigma_omega > 0.0)) throw Error(Errc::degenerate_grid, "signal marginal has zero width");
  return uniform_axis(0.0, factor / sigma_omega, nodes);
}

}  // namespace kdpspdc
