#pragma once

#include <cstdint>
#include <vector>

#include "rsq/components.hpp"

namespace rsq {

struct OptimalReferenceResult {
    std::vector<Assembly> assemblies;   // one per code
    std::vector<double> achieved_error; // |i - theta(X_i)| in LSB
    std::uint64_t nodes_explored = 0;
    double wall_seconds = 0.0;
};

// Exact minimum-error assembly for one code. Ties broken by the smallest
// selector value. Meet-in-the-middle; components capped at 30.
Assembly optimal_assembly(std::int64_t code, const ComponentRealization& real);

// All codes in one meet-in-the-middle pass. Equivalent to per-code
// optimal_assembly. Queries are independent; `parallel` runs them with
// OpenMP, the serial path is the reference.
OptimalReferenceResult optimal_reference_set(const ComponentRealization& real,
                                             bool parallel = true);

// Thresholds generated by the optimal assemblies (plus the dummy top).
ReferenceSet optimal_reference_thresholds(const ComponentRealization& real,
                                          bool parallel = true);

} // namespace rsq
