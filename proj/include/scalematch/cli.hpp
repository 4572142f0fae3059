#pragma once

#include <string>
#include <vector>

namespace scalematch {

/// Entry point shared by the binary and the tests. Returns the process exit
/// code: 0 on success, 1 on module errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args);

extern const char* const kVersionString;

}  // namespace scalematch
