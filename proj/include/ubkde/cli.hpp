#pragma once

#include <ostream>

namespace ubkde {

/// Entry point of the `ubkde` tool. Returns the process exit status:
/// 0 success, 1 verdict FAIL, 2 usage or config error, 3 accuracy or IO.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ubkde
