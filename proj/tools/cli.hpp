#pragma once

namespace croprow {

// Exit codes: 0 success, 1 validation error, 2 I/O error.
int run_cli(int argc, char** argv);

}  // namespace croprow
