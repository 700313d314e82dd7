#pragma once

#include <iostream>

namespace metasim::cli {

/// Entry point of the `metasim` command. Returns the process exit code:
/// 0 success, 2 simulation fault or invalid trace, 3 configuration error.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace metasim::cli
