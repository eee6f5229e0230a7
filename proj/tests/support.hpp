#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "kdpspdc/crystal_db.hpp"
#include "kdpspdc/spectral.hpp"

namespace testing {

inline const kdpspdc::CrystalDatabase& shipped_db() {
  static const auto db = kdpspdc::CrystalDatabase::load(KDPSPDC_TEST_DB);
  return db;
}

inline std::vector<kdpspdc::CrystalId> dispersive_crystals() {
  std::vector<kdpspdc::CrystalId> out;
  for (const auto& r : shipped_db().records())
    if (r.has_dispersion()) out.push_back(r.id);
  return out;
}

// Seeded generator for the hand-rolled property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  std::complex<double> complex_normal() {
    std::normal_distribution<double> d;
    return {d(rng), d(rng)};
  }

  Eigen::MatrixXcd matrix(Eigen::Index rows, Eigen::Index cols, bool complex = true) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        auto z = complex_normal();
        m(r, c) = complex ? z : std::complex<double>(z.real(), 0.0);
      }
    return m;
  }
};

// Normalised grid with arbitrary amplitudes on uniform axes.
inline kdpspdc::SpectralGrid random_grid(Gen& g, std::size_t ns, std::size_t ni, bool complex = true,
                                         double signal_center = 0.8, double idler_center = 0.8,
                                         double half_span = 0.002) {
  kdpspdc::SpectralGrid grid;
  grid.signal_um = kdpspdc::uniform_axis(signal_center, half_span, ns);
  grid.idler_um = kdpspdc::uniform_axis(idler_center, half_span, ni);
  grid.amplitude = g.matrix(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ni), complex);
  kdpspdc::normalize(grid);
  return grid;
}

// g(λs) h(λi) with Gaussian factors.
inline kdpspdc::SpectralGrid separable_grid(std::size_t ns, std::size_t ni, double center = 0.8,
                                            double width = 0.0005, double half_span = 0.004) {
  kdpspdc::SpectralGrid grid;
  grid.signal_um = kdpspdc::uniform_axis(center, half_span, ns);
  grid.idler_um = kdpspdc::uniform_axis(center, half_span, ni);
  grid.amplitude.resize(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ni));
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t i = 0; i < ni; ++i) {
      const double xs = (grid.signal_um[s] - center) / width;
      const double xi = (grid.idler_um[i] - center) / (1.7 * width);
      grid.amplitude(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) =
          std::exp(-0.5 * xs * xs) * std::exp(-0.5 * xi * xi);
    }
  kdpspdc::normalize(grid);
  return grid;
}

}  // namespace testing
