#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "kdpspdc/spectral.hpp"

namespace kdpspdc {

struct HomCurve {
  std::vector<double> delays_s;     // symmetric about 0
  std::vector<double> probability;  // four-fold coincidence probability
  // Set when the outer delays reach the ½ plateau (see visibility()).
  std::optional<double> baseline;
  std::optional<double> visibility;
};

/// Four-fold coincidence probability between the heralded signals of two
/// sources, P(τ) = ½[1 − Re Σ G(s₂,s₁) H(s₁,s₂) e^{−i(ω_{s₂}−ω_{s₁})τ}] with
/// G(a,b) = Σᵢ f₁(a,i) f₁*(b,i) and H(a,b) = Σᵢ f₂(a,i) f₂*(b,i), Riemann
/// weights included. Both grids must be normalised and share the signal axis.
HomCurve hom_fourfold(const SpectralGrid& f1, const SpectralGrid& f2, std::span<const double> delays_s);

/// Mean of P over the outer 10% of delays on each side.
double baseline(const HomCurve& curve);
/// (baseline − min P)/baseline. Throws Errc::delay_range_too_narrow unless P
/// at both end delays lies within 1e-3 of ½.
double visibility(const HomCurve& curve);

/// `nodes` delays over ±factor/σ_ω, σ_ω being the e^{-1/2} half-width of the
/// signal marginal converted to angular frequency at its peak.
std::vector<double> default_delays(const SpectralGrid& grid, std::size_t nodes = 201, double factor = 3.0);

}  // namespace kdpspdc
