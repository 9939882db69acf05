#pragma once

#include <string>
#include <vector>

namespace floqem {

// Entry point behind the floqem binary; args excludes argv[0]. Returns the
// process exit code: 0 success, 1 numerical failure, 2 config error.
int run_cli(const std::vector<std::string>& args);

}  // namespace floqem
