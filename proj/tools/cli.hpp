#pragma once

#include <ostream>

namespace uip::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Entry point shared by the executable and the tests. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uip::cli
