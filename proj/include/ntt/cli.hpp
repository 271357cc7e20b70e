#pragma once

namespace ntt {

// Entry point of the command line tool: gen-data, train, caption, eval.
// Returns a process exit code; never throws.
int run_cli(int argc, char** argv);

}  // namespace ntt
