#pragma once

#include <string>
#include <vector>

namespace sembed::cli {

// Shared by the sembed binary and the test harness. Exit codes:
// 0 success, 1 runtime failure, 2 usage/validation error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace sembed::cli
