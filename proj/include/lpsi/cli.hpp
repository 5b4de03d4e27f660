#pragma once

namespace lpsi {

/// Command-line entry point; returns the process exit code.
inline int run_cli(int, char**) { return 64; }

}  // namespace lpsi
