#pragma once

#include <iosfwd>

namespace expconv::cli {

/// 0: success with every check passing. 1: check violations (the report is
/// still written). 2: usage, configuration or input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace expconv::cli
