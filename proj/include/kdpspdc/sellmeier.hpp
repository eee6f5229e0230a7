#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kdpspdc {

/// Closed set of dispersion formulas the database may reference (λ in µm).
///
///   a: n² = A + B/(λ² − C) + D·λ²/(λ² − E)
///   b: n² = A + B/(λ² − C) + D/(λ² − E)
///   c: n² = A + Σₖ Bₖ·λ²/(λ² − Cₖ),  k = 1..3, coefficients {A, B₁, C₁, ...}
enum class SellmeierForm { a, b, c };

std::string_view form_id(SellmeierForm form);
std::optional<SellmeierForm> parse_form_id(std::string_view id);

struct SellmeierEntry {
  SellmeierForm form = SellmeierForm::a;
  std::vector<double> coefficients;
  double min_um = 0.0;
  double max_um = 0.0;
  std::string source;

  bool contains(double lambda_um) const { return lambda_um >= min_um && lambda_um <= max_um; }

  // No range checks here; CrystalDatabase guards the public entry points.
  double n_squared(double lambda_um) const;
  double dn_squared(double lambda_um) const;
  double index(double lambda_um) const;
  double dindex(double lambda_um) const;
};

/// Throws Errc::validation naming `context` when the coefficient count does not
/// fit the form, the range is empty, a pole falls inside the range, or n² ≤ 1
/// somewhere on the range.
void validate(const SellmeierEntry& entry, std::string_view context);

}  // namespace kdpspdc
