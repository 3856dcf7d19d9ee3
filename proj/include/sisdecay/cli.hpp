#pragma once

#include <string>
#include <vector>

namespace sisdecay {

// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 bad
// input, 3 numerical failure, 4 resource guard refusal.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace sisdecay
