#pragma once

namespace gslope {

// Entry point for the `gslope` binary. Exit codes: 0 success, 1 usage or
// input error, 2 numerical failure (output is still written when possible).
int run_cli(int argc, const char* const* argv);

}  // namespace gslope
