#pragma once

#include <iosfwd>

namespace mhphone {

/// Entry point of the `mh-phone` tool. Returns 0 on success, 1 on a usage
/// or validation error and 2 on a runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mhphone
