#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsq/components.hpp"
#include "rsq/fixed_point.hpp"

namespace rsq {

enum class MeasurementMode {
    behavioral, // comparisons digitized through the array itself + sub-DAC
    ideal       // weight differences read exactly
};

// Half-split capacitor array under estimation: identity N·(N-1, 1).
struct HalfSplitArray {
    ComponentRealization realization;
    int sub_dac_bits = 4;
    double comparator_offset = 0.0; // V_CO, LSB
    double bridge_factor = 1.0;     // multiplicative error of the sub-DAC section
    MeasurementMode mode = MeasurementMode::behavioral;
};

struct EstimationDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-component mismatch table. Values live on the 1/16-LSB fixed-point
// grid when storage is enabled; eps() returns the value the calibration
// logic actually uses.
class MismatchEstimate {
public:
    int resolution_bits = 0;
    bool fixed_point = true;
    std::vector<std::int16_t> eps_raw; // global component order, 1/16-LSB quanta
    std::vector<double> eps_exact;     // pre-encoding values
    std::vector<double> raw_differences; // d0_1, d1_0, d0_2, d1_1, ...
    double v_co_estimate = 0.0;
    std::int64_t saturation_events = 0;

    int component_count() const { return 2 * resolution_bits - 1; }
    double eps(int global_index) const {
        return fixed_point ? FixedPoint10::decode(eps_raw[static_cast<std::size_t>(global_index)])
                           : eps_exact[static_cast<std::size_t>(global_index)];
    }
    double eps_of(int set, int index_in_set) const {
        return eps(set == 0 ? index_in_set : resolution_bits + index_in_set);
    }
    double eps_sum() const;

    std::string to_json() const;
    static MismatchEstimate from_json(const std::string& text);
};

// True per-component mismatch in LSB units (actual normalized minus
// nominal); the closed-form oracle the estimator is checked against.
std::vector<double> true_mismatch(const ComponentRealization& real);

// Unsupervised estimation: consecutive-component comparisons, recursive
// integration, sum-to-zero bias correction, fixed-point encoding.
MismatchEstimate estimate_mismatch(const HalfSplitArray& array,
                                   bool use_fixed_point = true);

struct CalibratedAssembly {
    Assembly phase1;               // mapping & shifting output
    Assembly compensation_added;   // idle secondary LSB components added
    Assembly compensation_removed; // selected pool components released
    double diff_branch_lsb = 0.0;  // compensated on the opposing branch
    double sub_dac_trim = 0.0;     // fractional trim on the 1/16 LSB grid
    double residual = 0.0;         // eps_res before compensation
    bool saturated = false;
    bool fallback = false;

    Assembly effective() const {
        return Assembly{(phase1.selector | compensation_added.selector) &
                        ~compensation_removed.selector};
    }
};

// Greedy descending-weight allocation with exact nominal sum; migrates
// utilization to the MSBs so the secondary LSB pool stays idle.
Assembly map_and_shift(std::int64_t code, const GeometricIdentity& identity);

// eps_res = sum of stored estimates over selected components minus offset.
double residual_error(const Assembly& phase1, const MismatchEstimate& est,
                      double v_co);

CalibratedAssembly compensate_residual(const Assembly& phase1, double eps_res,
                                       const GeometricIdentity& identity);

// map_and_shift -> residual_error -> compensate_residual, then the sub-DAC
// (the c_{0,0} section in normal conversion) trims the predicted leftover
// to the nearest sixteenth; O(N) per code.
CalibratedAssembly calibrated_assembly(std::int64_t code,
                                       const MismatchEstimate& est);

// Thresholds produced by running the heuristic over every code
// (raw, before any comparator-offset shift).
ReferenceSet calibrated_reference_set(const ComponentRealization& real,
                                      const MismatchEstimate& est);

} // namespace rsq
