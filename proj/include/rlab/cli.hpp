#pragma once

// Command-line entry point. Exit codes: 0 success, 1 usage/config error,
// 2 partial data failure (a sidecar lists the failed samples).

namespace rlab {

int run_cli(int argc, const char* const* argv);

}  // namespace rlab
