#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsq {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the release gate end to end. Thresholds are pinned in the
// implementation; the seed only feeds the Monte Carlo streams.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 0x5eedULL,
                                            bool parallel = true);

// Prints one pass/fail line per criterion; returns true iff all passed.
bool report_acceptance(const std::vector<CriterionResult>& results);

} // namespace rsq
