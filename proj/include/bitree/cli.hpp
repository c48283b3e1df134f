#pragma once

#include <string>
#include <vector>

namespace bitree {

// Runs the command-line front end; returns the process exit code.
// 0 = success, 1 = usage or parse error, 2 = mathematical assertion failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace bitree
