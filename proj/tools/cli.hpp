#pragma once

#include <iosfwd>

namespace unmix::cli {

// Entry point of the `unmix` tool with its streams injected, so tests can
// drive it in-process. Returns 0 on success, 1 on flag, parse, validation or
// I/O errors and 2 when a solver diverges.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unmix::cli
