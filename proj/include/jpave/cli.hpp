#pragma once

#include <string>
#include <vector>

namespace jpave::cli {

// Dispatches one subcommand. Returns the process exit status: 0 on success,
// 1 for user errors (bad flags, missing files, schema mismatches), 2 for
// internal contract failures. Never throws, never prints stack traces.
int run(int argc, const char* const* argv);

// In-process convenience: args exclude the program name, e.g.
// {"synth", "--out", "corpus"}.
int run(const std::vector<std::string>& args);

}  // namespace jpave::cli
