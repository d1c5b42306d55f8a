#pragma once

namespace opmode {

// Full command-line front end. Returns the process exit code:
// 0 success, 1 data failure, 2 usage error.
int run_cli(int argc, char** argv);

}  // namespace opmode
