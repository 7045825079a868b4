#pragma once

// Command-line entry point wiring generation, splitting, verification and
// analysis into reproducible pipelines. Returns the process exit code:
// 0 on success, 2 on any usage or input error.

namespace rulebench {

int run_cli(int argc, const char* const* argv);

}  // namespace rulebench
