#pragma once

namespace colrisk {

// Full command-line front end. Returns the process exit status:
// 0 success, 2 usage error, 1 runtime error.
int run_cli(int argc, const char* const* argv);

} // namespace colrisk
