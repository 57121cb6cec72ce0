#pragma once

#include <string>
#include <vector>

namespace qmeas {

// Full command-line entry point (run / verify / sweep). Exit codes: 0 ok,
// 1 check failure, 2 config error, 3 runtime error.
int cli_main(const std::vector<std::string>& args);

} // namespace qmeas
