#include <doctest.h>

#include <cmath>
#include <complex>

#include "kdpspdc/error.hpp"
#include "kdpspdc/phasematch.hpp"
#include "kdpspdc/spectral.hpp"
#include "kdpspdc/units.hpp"
#include "support.hpp"

using namespace kdpspdc;
using testing::shipped_db;

namespace {

// Tr(ρ²)/Tr(ρ)² with ρ = A A†, by explicit loops.
double density_matrix_purity(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  std::vector<std::complex<double>> rho(static_cast<std::size_t>(n * n));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      std::complex<double> sum = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) sum += a(r, k) * std::conj(a(c, k));
      rho[static_cast<std::size_t>(r * n + c)] = sum;
    }
  std::complex<double> tr = 0.0, tr2 = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    tr += rho[static_cast<std::size_t>(r * n + r)];
    for (Eigen::Index k = 0; k < n; ++k)
      tr2 += rho[static_cast<std::size_t>(r * n + k)] * rho[static_cast<std::size_t>(k * n + r)];
  }
  return tr2.real() / (tr.real() * tr.real());
}

struct Case {
  SpdcConfig config;
  PumpSpec pump;
};

Case gvm_case(CrystalId id, GvmType t, double length_mm, double bandwidth_nm) {
  auto sol = solve_gvm_degenerate(shipped_db(), id, t);
  REQUIRE(sol);
  Case c{sol->config, {}};
  c.config.length_mm = length_mm;
  c.pump = {c.config.pump_um, nm_to_um(bandwidth_nm)};
  return c;
}

// Intensity-weighted standard deviation of a marginal.
double rms_width(const std::vector<double>& axis, const std::vector<double>& density) {
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t k = 0; k < axis.size(); ++k) {
    m0 += density[k];
    m1 += density[k] * axis[k];
    m2 += density[k] * axis[k] * axis[k];
  }
  const double mean = m1 / m0;
  return std::sqrt(m2 / m0 - mean * mean);
}

double fwhm(const std::vector<double>& axis, const std::vector<double>& density) {
  const double peak = *std::max_element(density.begin(), density.end());
  double lo = axis.back(), hi = axis.front();
  for (std::size_t k = 0; k < axis.size(); ++k)
    if (density[k] >= 0.5 * peak) {
      lo = std::min(lo, axis[k]);
      hi = std::max(hi, axis[k]);
    }
  return hi - lo;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("pump bandwidth converts to an angular-frequency width by the literal formula") {
  const PumpSpec p{0.415, 0.002};
  const double c = speed_of_light;
  const double expected = 2 * pi * c * 0.002e-6 / (0.415e-6 * 0.415e-6 - 0.001e-6 * 0.001e-6);
  CHECK(p.sigma_rad_per_s() == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(PumpSpec({0.415, 0.0}).validate(), Error);
  CHECK_THROWS_AS(PumpSpec({0.415, 0.5}).validate(), Error);
}

TEST_CASE("pump envelope peaks on the energy-conserving line") {
  const PumpSpec p{0.5, 0.002};
  CHECK(pump_envelope(1.0, 1.0, p) == doctest::Approx(1.0).epsilon(1e-12));
  testing::Gen g(31);
  for (int k = 0; k < 50; ++k) {
    const double s = g.uniform(0.6, 1.0);
    const double i = 1.0 / (1.0 / 0.5 - 1.0 / s);
    CHECK(pump_envelope(s, i, p) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("pump envelope falls to e^-1/2 at one sigma of detuning") {
  const PumpSpec p{0.5, 0.002};
  const double wi = angular_frequency(1.0);
  const double ws = angular_frequency(0.5) + p.sigma_rad_per_s() - wi;
  const double ls = 2 * pi * speed_of_light / ws * 1e6;
  CHECK(pump_envelope(ls, 1.0, p) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("phase-matching amplitude is 1 on the matched contour and 0 at the first zero") {
  const auto& db = shipped_db();
  const auto c = gvm_case(CrystalId::KDP, GvmType::gvm3, 10.0, 1.0).config;
  CHECK(phase_matching_amplitude(db, c.signal_um, c.idler_um, c) == doctest::Approx(1.0).epsilon(1e-9));
  // Independent bisection for ΔkL/2 = π along the signal axis.
  auto half_phase = [&](double ls) {
    const double lp = 1.0 / (1.0 / ls + 1.0 / c.idler_um);
    return 0.5 * c.length_mm * 1e3 * delta_k(db, c.crystal, lp, ls, c.idler_um, c.angle_deg);
  };
  const double x0 = half_phase(c.signal_um);
  double lo = c.signal_um, hi = c.signal_um + 0.05;
  REQUIRE(std::abs(half_phase(hi) - x0) > pi);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (std::abs(half_phase(mid) - x0) < pi ? lo : hi) = mid;
  }
  CHECK(std::abs(phase_matching_amplitude(db, lo, c.idler_um, c)) < 1e-9);
}

TEST_CASE("sampled ridge orientation agrees with the predicted ridge angle") {
  const auto& db = shipped_db();
  for (double pump : {0.45, 0.5, 0.6}) {
    SpdcConfig c = SpdcConfig::degenerate(CrystalId::KDP, pump, 45.0, 20.0);
    c.angle_deg = solve_angle(db, c.crystal, c.pump_um, c.signal_um, c.idler_um);
    const auto theta = ridge_angle(db, c);
    REQUIRE(theta);
    // Principal axis of |PMF|² over a disc in (ω_s, ω_i) centred on the config.
    const double ws0 = angular_frequency(c.signal_um), wi0 = angular_frequency(c.idler_um);
    const double h = 1e9;
    auto dk_at = [&](double x, double y) {
      const double ls = 2 * pi * speed_of_light / (ws0 + x) * 1e6;
      const double li = 2 * pi * speed_of_light / (wi0 + y) * 1e6;
      return delta_k(db, c.crystal, 1.0 / (1.0 / ls + 1.0 / li), ls, li, c.angle_deg);
    };
    const double gx = (dk_at(h, 0) - dk_at(-h, 0)) / (2 * h);
    const double gy = (dk_at(0, h) - dk_at(0, -h)) / (2 * h);
    const double width = 2 * pi / (c.length_mm * 1e3 * std::hypot(gx, gy));
    const double radius = 30 * width;
    double sxx = 0, syy = 0, sxy = 0;
    constexpr int n = 301;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double x = radius * (2.0 * a / (n - 1) - 1.0);
        const double y = radius * (2.0 * b / (n - 1) - 1.0);
        if (x * x + y * y > radius * radius) continue;
        const double ls = 2 * pi * speed_of_light / (ws0 + x) * 1e6;
        const double li = 2 * pi * speed_of_light / (wi0 + y) * 1e6;
        const double w = std::pow(phase_matching_amplitude(db, ls, li, c), 2);
        sxx += w * x * x;
        syy += w * y * y;
        sxy += w * x * y;
      }
    double fit = rad_to_deg(0.5 * std::atan2(2 * sxy, sxx - syy));
    if (fit < 0) fit += 180.0;
    const double d = std::fmod(std::abs(fit - *theta), 180.0);
    CHECK(std::min(d, 180.0 - d) <= 2.0);
  }
}

TEST_CASE("Schmidt decomposition of a rank-one grid gives unit purity") {
  const auto g = testing::separable_grid(41, 37);
  const auto r = schmidt(g);
  CHECK(r.purity == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.schmidt_number * r.purity == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("property: SVD purity equals the density-matrix oracle on random complex matrices") {
  testing::Gen g(32);
  for (int k = 0; k < 50; ++k) {
    const auto rows = static_cast<Eigen::Index>(2 + g.index(7));
    const auto cols = static_cast<Eigen::Index>(2 + g.index(7));
    const Eigen::MatrixXcd a = g.matrix(rows, cols);
    CHECK(std::abs(schmidt(a).purity - density_matrix_purity(a)) <= 1e-10);
  }
  const Eigen::MatrixXcd six = g.matrix(6, 6);
  CHECK(std::abs(schmidt(six).purity - density_matrix_purity(six)) <= 1e-10);
}

TEST_CASE("property: Schmidt coefficients are descending, sum to one and give P and K consistently") {
  testing::Gen g(33);
  for (int k = 0; k < 30; ++k) {
    const auto r = schmidt(g.matrix(10, 7));
    double sum = 0, sq = 0;
    for (std::size_t j = 0; j < r.coefficients.size(); ++j) {
      CHECK(r.coefficients[j] >= 0.0);
      if (j > 0) CHECK(r.coefficients[j] <= r.coefficients[j - 1]);
      sum += r.coefficients[j];
      sq += r.coefficients[j] * r.coefficients[j];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
    CHECK(std::abs(r.purity - sq) <= 1e-12);
    CHECK(r.purity > 0.0);
    CHECK(r.purity <= 1.0 + 1e-12);
    CHECK(std::abs(r.schmidt_number * r.purity - 1.0) <= 1e-12);
  }
}

TEST_CASE("property: purity is invariant under transposition and a global phase") {
  testing::Gen g(34);
  for (int k = 0; k < 30; ++k) {
    const Eigen::MatrixXcd a = g.matrix(9, 12);
    const double p = schmidt(a).purity;
    CHECK(std::abs(schmidt(Eigen::MatrixXcd(a.transpose())).purity - p) <= 1e-10);
    const std::complex<double> phase = std::polar(1.0, g.uniform(0, 2 * pi));
    CHECK(std::abs(schmidt(Eigen::MatrixXcd(a * phase)).purity - p) <= 1e-10);
  }
}

TEST_CASE("all-zero amplitudes are rejected") {
  CHECK_THROWS_AS(schmidt(Eigen::MatrixXcd::Zero(4, 4)), Error);
  SpectralGrid g = make_grid({0.8, 0.01, 5, 0.8, 0.01, 5, {}});
  try {
    normalize(g);
    FAIL("expected degenerate_grid");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_grid);
  }
}

TEST_CASE("axes must be ascending and uniform") {
  SpectralGrid g = testing::separable_grid(11, 11);
  CHECK_NOTHROW(g.check_axes());
  g.signal_um[5] += 1e-7;
  CHECK_THROWS_AS(g.check_axes(), Error);
  g = testing::separable_grid(11, 11);
  std::reverse(g.idler_um.begin(), g.idler_um.end());
  CHECK_THROWS_AS(g.check_axes(), Error);
}

TEST_CASE("marginals integrate to one and factor a separable grid") {
  const auto g = testing::separable_grid(31, 27);
  const auto m = marginals(g);
  double ss = 0, si = 0;
  for (double v : m.signal) ss += v * g.signal_step();
  for (double v : m.idler) si += v * g.idler_step();
  CHECK(std::abs(ss - 1.0) <= 1e-10);
  CHECK(std::abs(si - 1.0) <= 1e-10);
  // densities are ~1e5 per µm², so compare relative to the peak
  const double peak = g.amplitude.cwiseAbs2().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index s = 0; s < g.amplitude.rows(); ++s)
    for (Eigen::Index i = 0; i < g.amplitude.cols(); ++i)
      worst = std::max(worst, std::abs(std::norm(g.amplitude(s, i)) - m.signal[static_cast<std::size_t>(s)] *
                                                                         m.idler[static_cast<std::size_t>(i)]));
  CHECK(worst / peak <= 1e-10);
}

TEST_CASE("property: normalised grids keep unit norm and operations leave them untouched") {
  testing::Gen g(35);
  for (int k = 0; k < 10; ++k) {
    const auto grid = testing::random_grid(g, 5 + g.index(10), 5 + g.index(10));
    CHECK(std::abs(grid.norm_squared() - 1.0) <= 1e-10);
    const Eigen::MatrixXcd before = grid.amplitude;
    schmidt(grid);
    marginals(grid);
    CHECK(grid.amplitude == before);
  }
}

TEST_CASE("GVM1 joint amplitude is a horizontal strip, GVM2 a vertical one") {
  const auto& db = shipped_db();
  const auto kdp = gvm_case(CrystalId::KDP, GvmType::gvm1, 15.0, 2.0);
  // shape checks want the central lobe resolved, hence the finer grid
  const auto g1 = jsa(db, kdp.config, kdp.pump, auto_grid(db, kdp.config, kdp.pump, 601));
  const auto m1 = marginals(g1);
  // Broad along the signal (horizontal) axis.
  CHECK(fwhm(g1.signal_um, m1.signal) > 2.0 * fwhm(g1.idler_um, m1.idler));
  CHECK(rms_width(g1.signal_um, m1.signal) > rms_width(g1.idler_um, m1.idler));

  const auto dkdp = gvm_case(CrystalId::DKDP, GvmType::gvm2, 30.0, 3.0);
  const auto g2 = jsa(db, dkdp.config, dkdp.pump, auto_grid(db, dkdp.config, dkdp.pump, 601));
  const auto m2 = marginals(g2);
  CHECK(fwhm(g2.idler_um, m2.idler) > 2.0 * fwhm(g2.signal_um, m2.signal));
}

TEST_CASE("GVM3 joint amplitude has a near-round centre") {
  const auto& db = shipped_db();
  const auto c = gvm_case(CrystalId::KDP, GvmType::gvm3, 30.0, 0.23);
  const auto g = jsa(db, c.config, c.pump, auto_grid(db, c.config, c.pump, 601));
  const auto m = marginals(g);
  const double ratio = fwhm(g.signal_um, m.signal) / fwhm(g.idler_um, m.idler);
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
  const double p = schmidt(g).purity;
  CHECK(p > 0.79);
  CHECK(p < 0.85);
}

TEST_CASE("automatic grid is centred exactly on the configuration") {
  const auto& db = shipped_db();
  const auto c = gvm_case(CrystalId::ADP, GvmType::gvm1, 15.0, 2.0);
  const auto spec = auto_grid(db, c.config, c.pump);
  const auto g = make_grid(spec);
  CHECK(g.signal_um.size() == 201);
  CHECK(g.idler_um.size() == 201);
  CHECK(g.signal_um[100] == c.config.signal_um);
  CHECK(g.idler_um[100] == c.config.idler_um);
  CHECK(spec.warnings.empty());
}

TEST_CASE("automatic grid captures the norm of a grid twice as large") {
  const auto& db = shipped_db();
  const Case cases[] = {gvm_case(CrystalId::KDP, GvmType::gvm1, 15.0, 2.0),
                        gvm_case(CrystalId::ADP, GvmType::gvm1, 15.0, 2.0),
                        gvm_case(CrystalId::KDP, GvmType::gvm3, 30.0, 0.23)};
  for (const auto& c : cases) {
    const auto spec = auto_grid(db, c.config, c.pump);
    CHECK(spec.warnings.empty());
    GridSpec big = spec;
    big.signal_half_span_um *= 2;
    big.idler_half_span_um *= 2;
    big.signal_nodes = big.idler_nodes = 401;
    const auto g = jsa(db, c.config, c.pump, big);
    double inside = 0, total = 0;
    for (Eigen::Index s = 0; s < g.amplitude.rows(); ++s)
      for (Eigen::Index i = 0; i < g.amplitude.cols(); ++i) {
        const double w = std::norm(g.amplitude(s, i));
        total += w;
        if (s >= 100 && s <= 300 && i >= 100 && i <= 300) inside += w;
      }
    CHECK(inside / total >= 0.999);
  }
}

TEST_CASE("automatic grid warns when the dispersion range blocks the reference window") {
  // DKDP GVM2 sits at 1.83 µm and the data end at 2.0 µm: a reference twice
  // the grid cannot be built, so the shortfall is reported instead.
  const auto& db = shipped_db();
  const auto c = gvm_case(CrystalId::DKDP, GvmType::gvm2, 30.0, 3.0);
  const auto spec = auto_grid(db, c.config, c.pump);
  REQUIRE(spec.warnings.size() == 1);
  CHECK(spec.warnings[0].find("range-limited reference") != std::string::npos);
  CHECK(spec.idler_center_um + 2 * spec.idler_half_span_um > db.at(CrystalId::DKDP).max_um());
  const auto g = make_grid(spec);
  CHECK(g.idler_um.back() <= db.at(CrystalId::DKDP).max_um());
}

TEST_CASE("purity converges when the node count doubles") {
  const auto& db = shipped_db();
  const auto c = gvm_case(CrystalId::KDP, GvmType::gvm1, 15.0, 2.0);
  const double p201 = schmidt(jsa(db, c.config, c.pump, auto_grid(db, c.config, c.pump, 201))).purity;
  const double p401 = schmidt(jsa(db, c.config, c.pump, auto_grid(db, c.config, c.pump, 401))).purity;
  CHECK(std::abs(p201 - p401) < 5e-4);
}

TEST_CASE("automatic grid is clipped to the dispersion range with a warning") {
  const auto& db = shipped_db();
  // KDP data end at 1.529 µm; a 1.5 µm degenerate pair with a broad pump
  // would need nodes beyond it.
  SpdcConfig c = SpdcConfig::degenerate(CrystalId::KDP, 0.75, 45.0, 5.0);
  c.angle_deg = solve_angle(db, c.crystal, c.pump_um, c.signal_um, c.idler_um);
  const PumpSpec pump{0.75, 0.004};
  const auto spec = auto_grid(db, c, pump);
  CHECK_FALSE(spec.warnings.empty());
  const auto g = make_grid(spec);
  CHECK(g.idler_um.back() <= db.at(CrystalId::KDP).max_um());
  CHECK(g.signal_um[100] == c.signal_um);
  CHECK_NOTHROW(jsa(db, c, pump, spec));
}

TEST_CASE("resampling onto the same axis is the identity and zero outside the source") {
  testing::Gen g(36);
  const auto grid = testing::random_grid(g, 21, 9);
  const auto same = resample_signal(grid, grid.signal_um);
  CHECK((same.amplitude - grid.amplitude).norm() <= 1e-12 * grid.amplitude.norm());
  std::vector<double> shifted = uniform_axis(grid.signal_um[10] + 0.5 * (grid.signal_um.back() - grid.signal_um[0]),
                                             0.5 * (grid.signal_um.back() - grid.signal_um[0]), 21);
  const auto moved = resample_signal(grid, shifted);
  CHECK(std::abs(moved.norm_squared() - 1.0) < 1e-10);
  CHECK(moved.amplitude.row(20).norm() == 0.0);
}

}  // TEST_SUITE
