#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace graphwalk {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// The oracle battery behind `graphwalk verify`: kernel exactness, the
// product-return factorization, partition invariants, fiber tables, the
// bidule inequality and reproducibility, all at quick parameters.
std::vector<CheckResult> run_verify_battery(std::uint64_t seed);

}  // namespace graphwalk
