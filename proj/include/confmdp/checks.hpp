#pragma once

// Self-check suite behind `confmdp verify`: identities and inequalities of the
// safe-update theory checked numerically on small instances.

#include <string>
#include <vector>

namespace confmdp {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<CheckResult> run_verification();

} // namespace confmdp
