#pragma once

#include <iosfwd>

namespace kdpspdc::cli {

// Exit statuses.
inline constexpr int exit_ok = 0;
inline constexpr int exit_no_solution = 1;
inline constexpr int exit_input = 2;

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdpspdc::cli
