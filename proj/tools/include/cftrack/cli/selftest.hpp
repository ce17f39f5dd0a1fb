#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cftrack::cli {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Deliberate faults for checking that the suites isolate them.
struct SelftestFaults {
    double w_divisor_offset = 0.0;
};

/// Suites: spectral-identities, sherman-morrison, solver-equivalence,
/// objective-consistency, detection-equivariance.
std::vector<SuiteResult> run_selftest_suites(std::uint64_t seed, const SelftestFaults& faults = {});

}  // namespace cftrack::cli
