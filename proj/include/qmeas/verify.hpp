#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qmeas {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Check {
    std::string name;
    int criterion = 0; // acceptance criterion number
    std::function<CheckResult()> fn;
};

// the full verification suite, in criterion order
const std::vector<Check>& all_checks();

// run one named check; throws std::invalid_argument for unknown names
CheckResult run_check(const std::string& name);

} // namespace qmeas
