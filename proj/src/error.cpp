#include "kdpspdc/error.hpp"

namespace kdpspdc {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::parse: return "parse_error";
    case Errc::validation: return "validation_error";
    case Errc::out_of_range: return "out_of_range";
    case Errc::no_dispersion_data: return "no_dispersion_data";
    case Errc::no_phase_matching: return "no_phase_matching";
    case Errc::no_solution: return "no_solution";
    case Errc::mismatched_axes: return "mismatched_axes";
    case Errc::unnormalized: return "unnormalized";
    case Errc::degenerate_grid: return "degenerate_grid";
    case Errc::delay_range_too_narrow: return "delay_range_too_narrow";
    case Errc::io: return "io_error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace kdpspdc
