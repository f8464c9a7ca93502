#pragma once

#include <ostream>

namespace v2v {

/// Entry point for the `v2vsim` executable. Returns 0 on success, 1 on a
/// config error and 2 on a runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace v2v
