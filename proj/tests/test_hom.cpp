#include <doctest.h>

#include <cmath>
#include <complex>

#include "kdpspdc/error.hpp"
#include "kdpspdc/hom.hpp"
#include "kdpspdc/phasematch.hpp"
#include "kdpspdc/units.hpp"
#include "support.hpp"

using namespace kdpspdc;
using testing::shipped_db;

namespace {

// The four-fold integrand summed directly, O(N⁴) per delay.
double direct_fourfold(const SpectralGrid& f1, const SpectralGrid& f2, double tau) {
  const std::size_t ns = f1.signal_um.size();
  const double w = f1.signal_step() * f1.signal_step() * f1.idler_step() * f2.idler_step();
  double total = 0.0;
  for (std::size_t s1 = 0; s1 < ns; ++s1)
    for (std::size_t s2 = 0; s2 < ns; ++s2) {
      const double dw = angular_frequency(f1.signal_um[s2]) - angular_frequency(f1.signal_um[s1]);
      const std::complex<double> phase = std::polar(1.0, -dw * tau);
      for (Eigen::Index i1 = 0; i1 < f1.amplitude.cols(); ++i1)
        for (Eigen::Index i2 = 0; i2 < f2.amplitude.cols(); ++i2) {
          const auto a = f1.amplitude(static_cast<Eigen::Index>(s1), i1) * f2.amplitude(static_cast<Eigen::Index>(s2), i2);
          const auto b = f1.amplitude(static_cast<Eigen::Index>(s2), i1) * f2.amplitude(static_cast<Eigen::Index>(s1), i2);
          total += std::norm(a - b * phase);
        }
    }
  return 0.25 * total * w;
}

// Eleven delays spanning a few coherence times of a 4 nm wide axis at 800 nm.
std::vector<double> oracle_delays() { return uniform_axis(0.0, 400e-15, 11); }

SpectralGrid kdp_gvm1_grid(std::size_t nodes = 201) {
  const auto& db = shipped_db();
  auto sol = solve_gvm_degenerate(db, CrystalId::KDP, GvmType::gvm1);
  REQUIRE(sol);
  const PumpSpec pump{sol->config.pump_um, 0.002};
  return jsa(db, sol->config, pump, auto_grid(db, sol->config, pump, nodes));
}

}  // namespace

TEST_SUITE("hom") {

TEST_CASE("property: factored contraction equals the direct quadruple sum on 8x8 complex grids") {
  testing::Gen g(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f1 = testing::random_grid(g, 8, 8, true);
    auto f2 = testing::random_grid(g, 8, 8, true, 0.8, 0.79);
    f2.signal_um = f1.signal_um;
    normalize(f2);
    const auto delays = oracle_delays();
    const auto curve = hom_fourfold(f1, f2, delays);
    for (std::size_t k = 0; k < delays.size(); ++k)
      CHECK(std::abs(curve.probability[k] - direct_fourfold(f1, f2, delays[k])) <= 1e-8);
  }
}

TEST_CASE("factored contraction handles different idler axes") {
  testing::Gen g(42);
  const auto f1 = testing::random_grid(g, 8, 5, true);
  auto f2 = testing::random_grid(g, 8, 11, true, 0.8, 1.6, 0.01);
  f2.signal_um = f1.signal_um;
  normalize(f2);
  const auto delays = oracle_delays();
  const auto curve = hom_fourfold(f1, f2, delays);
  for (std::size_t k = 0; k < delays.size(); ++k)
    CHECK(std::abs(curve.probability[k] - direct_fourfold(f1, f2, delays[k])) <= 1e-8);
}

TEST_CASE("identical pure sources interfere perfectly") {
  const auto f = testing::separable_grid(61, 61);
  const auto curve = hom_fourfold(f, f, default_delays(f));
  REQUIRE(curve.visibility);
  CHECK(std::abs(curve.probability[curve.probability.size() / 2]) <= 1e-6);
  CHECK(std::abs(*curve.visibility - 1.0) <= 1e-6);
}

TEST_CASE("sources with disjoint signal spectra do not interfere") {
  testing::Gen g(43);
  auto f1 = testing::random_grid(g, 8, 6, true);
  auto f2 = testing::random_grid(g, 8, 6, true);
  f2.signal_um = f1.signal_um;
  normalize(f2);
  f1.amplitude.bottomRows(4).setZero();
  f2.amplitude.topRows(4).setZero();
  normalize(f1);
  normalize(f2);
  const auto delays = oracle_delays();
  const auto curve = hom_fourfold(f1, f2, delays);
  for (std::size_t k = 0; k < delays.size(); ++k) {
    CHECK(std::abs(curve.probability[k] - 0.5) <= 1e-12);
    CHECK(std::abs(direct_fourfold(f1, f2, delays[k]) - 0.5) <= 1e-12);
  }
  REQUIRE(curve.visibility);
  CHECK(std::abs(*curve.visibility) <= 1e-6);
}

TEST_CASE("flat curve at one half has zero visibility") {
  HomCurve c;
  c.delays_s = uniform_axis(0.0, 1e-12, 51);
  c.probability.assign(51, 0.5);
  CHECK(visibility(c) == 0.0);
  CHECK(baseline(c) == 0.5);
}

TEST_CASE("visibility refuses a delay range that misses the plateau") {
  const auto f = testing::separable_grid(61, 61);
  const auto narrow = uniform_axis(0.0, 1e-16, 21);
  const auto curve = hom_fourfold(f, f, narrow);
  CHECK_FALSE(curve.visibility);
  CHECK_FALSE(curve.baseline);
  try {
    visibility(curve);
    FAIL("expected delay_range_too_narrow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::delay_range_too_narrow);
  }
}

TEST_CASE("property: real grids give a curve symmetric in delay") {
  testing::Gen g(44);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f1 = testing::random_grid(g, 12, 9, false);
    auto f2 = testing::random_grid(g, 12, 7, false);
    f2.signal_um = f1.signal_um;
    normalize(f2);
    const auto delays = uniform_axis(0.0, 300e-15, 31);
    const auto curve = hom_fourfold(f1, f2, delays);
    for (std::size_t k = 0; k < delays.size(); ++k)
      CHECK(std::abs(curve.probability[k] - curve.probability[delays.size() - 1 - k]) <= 1e-9);
  }
}

TEST_CASE("property: swapping sources leaves real-grid curves unchanged and mirrors complex ones") {
  testing::Gen g(45);
  for (bool complex : {false, true}) {
    const auto f1 = testing::random_grid(g, 10, 9, complex);
    auto f2 = testing::random_grid(g, 10, 6, complex);
    f2.signal_um = f1.signal_um;
    normalize(f2);
    const auto delays = uniform_axis(0.0, 300e-15, 31);
    const auto a = hom_fourfold(f1, f2, delays);
    const auto b = hom_fourfold(f2, f1, delays);
    for (std::size_t k = 0; k < delays.size(); ++k) {
      const std::size_t mirrored = delays.size() - 1 - k;
      CHECK(std::abs(a.probability[k] - b.probability[mirrored]) <= 1e-9);
      if (!complex) CHECK(std::abs(a.probability[k] - b.probability[k]) <= 1e-9);
    }
  }
}

TEST_CASE("property: coincidence probability stays within [0, 1/2]") {
  testing::Gen g(46);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f1 = testing::random_grid(g, 9, 9, true);
    auto f2 = testing::random_grid(g, 9, 9, true);
    f2.signal_um = f1.signal_um;
    normalize(f2);
    const auto curve = hom_fourfold(f1, f2, uniform_axis(0.0, 500e-15, 41));
    for (double p : curve.probability) {
      CHECK(p >= -1e-12);
      CHECK(p <= 0.5 + 1e-9);
    }
  }
}

TEST_CASE("identical sources: dip depth equals the Schmidt purity") {
  const auto f = kdp_gvm1_grid();
  const double purity = schmidt(f).purity;
  const auto delays = default_delays(f);
  const auto curve = hom_fourfold(f, f, delays);
  REQUIRE(curve.visibility);
  CHECK(delays[100] == 0.0);
  CHECK(std::abs(curve.probability[100] - (1.0 - purity) / 2.0) <= 1e-3);
  CHECK(std::abs(*curve.visibility - purity) <= 1e-2);
  CHECK(std::abs(curve.probability.front() - 0.5) <= 1e-3);
  CHECK(std::abs(curve.probability.back() - 0.5) <= 1e-3);
  CHECK(std::abs(*curve.baseline - 0.5) <= 1e-3);
}

TEST_CASE("default delays are symmetric with a node at zero") {
  const auto f = testing::separable_grid(41, 41);
  const auto d = default_delays(f, 101, 3.0);
  REQUIRE(d.size() == 101);
  CHECK(d[50] == 0.0);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] == doctest::Approx(-d[d.size() - 1 - k]).epsilon(1e-14));
  // σ_ω of a Gaussian amplitude exp(-x²/2w²): intensity width w/√2 in λ.
  const double w = 0.0005 / std::sqrt(2.0);
  const double sigma = 2 * pi * speed_of_light * w * 1e-6 / (0.8e-6 * 0.8e-6);
  CHECK(d.back() == doctest::Approx(3.0 / sigma).epsilon(2e-2));
}

TEST_CASE("inputs are checked before contraction") {
  testing::Gen g(47);
  const auto f1 = testing::random_grid(g, 8, 8);
  const auto f2 = testing::random_grid(g, 9, 8);
  const auto delays = oracle_delays();
  auto expect = [&](const SpectralGrid& a, const SpectralGrid& b, Errc code) {
    try {
      hom_fourfold(a, b, delays);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  expect(f1, f2, Errc::mismatched_axes);
  auto shifted = f1;
  for (double& x : shifted.signal_um) x += 1e-6;
  expect(f1, shifted, Errc::mismatched_axes);
  auto loud = f1;
  loud.amplitude *= 1.01;
  expect(f1, loud, Errc::unnormalized);
}

}  // TEST_SUITE
