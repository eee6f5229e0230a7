#include "kdpspdc/sellmeier.hpp"

#include <cmath>

#include "kdpspdc/error.hpp"

namespace kdpspdc {

std::string_view form_id(SellmeierForm form) {
  switch (form) {
    case SellmeierForm::a: return "a";
    case SellmeierForm::b: return "b";
    case SellmeierForm::c: return "c";
  }
  return "?";
}

std::optional<SellmeierForm> parse_form_id(std::string_view id) {
  if (id == "a") return SellmeierForm::a;
  if (id == "b") return SellmeierForm::b;
  if (id == "c") return SellmeierForm::c;
  return std::nullopt;
}

double SellmeierEntry::n_squared(double lambda_um) const {
  const auto& k = coefficients;
  const double l2 = lambda_um * lambda_um;
  switch (form) {
    case SellmeierForm::a:
      return k[0] + k[1] / (l2 - k[2]) + k[3] * l2 / (l2 - k[4]);
    case SellmeierForm::b:
      return k[0] + k[1] / (l2 - k[2]) + k[3] / (l2 - k[4]);
    case SellmeierForm::c: {
      double n2 = k[0];
      for (std::size_t i = 1; i + 1 < k.size(); i += 2) n2 += k[i] * l2 / (l2 - k[i + 1]);
      return n2;
    }
  }
  return 0.0;
}

double SellmeierEntry::dn_squared(double lambda_um) const {
  const auto& k = coefficients;
  const double l = lambda_um;
  const double l2 = l * l;
  // d/dλ [1/(λ² − C)] = −2λ/(λ² − C)²,  d/dλ [λ²/(λ² − E)] = −2λE/(λ² − E)²
  auto inv = [&](double c) { return -2.0 * l / ((l2 - c) * (l2 - c)); };
  auto ratio = [&](double c) { return -2.0 * l * c / ((l2 - c) * (l2 - c)); };
  switch (form) {
    case SellmeierForm::a: return k[1] * inv(k[2]) + k[3] * ratio(k[4]);
    case SellmeierForm::b: return k[1] * inv(k[2]) + k[3] * inv(k[4]);
    case SellmeierForm::c: {
      double d = 0.0;
      for (std::size_t i = 1; i + 1 < k.size(); i += 2) d += k[i] * ratio(k[i + 1]);
      return d;
    }
  }
  return 0.0;
}

double SellmeierEntry::index(double lambda_um) const { return std::sqrt(n_squared(lambda_um)); }

double SellmeierEntry::dindex(double lambda_um) const {
  return dn_squared(lambda_um) / (2.0 * index(lambda_um));
}

namespace {

std::vector<double> poles(const SellmeierEntry& e) {
  const auto& k = e.coefficients;
  switch (e.form) {
    case SellmeierForm::a:
    case SellmeierForm::b: return {k[2], k[4]};
    case SellmeierForm::c: {
      std::vector<double> out;
      for (std::size_t i = 2; i < k.size(); i += 2) out.push_back(k[i]);
      return out;
    }
  }
  return {};
}

}  // namespace

void validate(const SellmeierEntry& entry, std::string_view context) {
  auto fail = [&](const std::string& why) {
    throw Error(Errc::validation, std::string(context) + ": " + why);
  };
  const std::size_t count = entry.coefficients.size();
  switch (entry.form) {
    case SellmeierForm::a:
    case SellmeierForm::b:
      if (count != 5) fail("form '" + std::string(form_id(entry.form)) + "' needs 5 coefficients, got " + std::to_string(count));
      break;
    case SellmeierForm::c:
      if (count != 3 && count != 5 && count != 7)
        fail("form 'c' needs 3, 5 or 7 coefficients, got " + std::to_string(count));
      break;
  }
  for (double c : entry.coefficients)
    if (!std::isfinite(c)) fail("non-finite coefficient");
  if (!(entry.min_um > 0.0) || !std::isfinite(entry.max_um))
    fail("range must be positive and finite");
  if (!(entry.min_um < entry.max_um))
    fail("range [" + std::to_string(entry.min_um) + ", " + std::to_string(entry.max_um) + "] is empty or inverted");
  const double lo2 = entry.min_um * entry.min_um;
  const double hi2 = entry.max_um * entry.max_um;
  for (double pole : poles(entry))
    if (pole >= lo2 && pole <= hi2) fail("resonance at λ² = " + std::to_string(pole) + " lies inside the valid range");
  constexpr int samples = 512;
  for (int i = 0; i <= samples; ++i) {
    const double l = entry.min_um + (entry.max_um - entry.min_um) * i / samples;
    const double n2 = entry.n_squared(l);
    if (!(n2 > 1.0)) fail("n² = " + std::to_string(n2) + " ≤ 1 at " + std::to_string(l) + " µm");
  }
}

}  // namespace kdpspdc
