#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kdpspdc {

enum class Errc {
  parse,
  validation,
  out_of_range,
  no_dispersion_data,
  no_phase_matching,
  no_solution,
  mismatched_axes,
  unnormalized,
  degenerate_grid,
  delay_range_too_narrow,
  io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace kdpspdc
