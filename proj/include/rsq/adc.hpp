#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsq/calibration.hpp"
#include "rsq/components.hpp"
#include "rsq/reference_set.hpp"

namespace rsq {

enum class ConversionMode { binary, heuristic_calibrated, oracle_optimal };

std::string to_string(ConversionMode mode);
ConversionMode conversion_mode_from_string(const std::string& s);

struct AdcConfig {
    int resolution_bits = 14;
    ConversionMode mode = ConversionMode::binary;
    double sigma0 = 0.0;
    double sigma0_bridge = 0.0;
    double v_co = 0.0;                   // comparator offset, LSB
    double comparator_noise_sigma = 0.0; // per comparison, LSB
    std::uint64_t seed = 0;
};

struct TransferFunction {
    int resolution_bits = 0;
    std::vector<double> code_edges;          // T(1) .. T(2^N - 1)
    std::vector<std::int64_t> missing_codes; // zero-width regions
    std::vector<std::int64_t> non_monotone;  // codes with inverted edges

    double edge(std::int64_t i) const { return code_edges[static_cast<std::size_t>(i) - 1]; }
};

struct LinearityResult {
    std::vector<double> dnl; // DNL(i) = T(i+1) - T(i) - 1
    std::vector<double> inl; // end-point fit, INL(first) = INL(last) = 0
    double max_abs_dnl = 0.0;
    double max_abs_inl = 0.0;
};

LinearityResult dnl_inl(const TransferFunction& tf);

// Edges taken directly from a reference set (T(i) = theta_i); the fast
// path used by sweeps, equivalent to bisection at zero noise.
TransferFunction transfer_from_references(const ReferenceSet& refs);

// One Monte Carlo instance of the converter: a sampled half-split array
// plus the mode-dependent reference generation, sharing the same unit
// cells across modes.
class AdcTrial {
public:
    AdcTrial(const AdcConfig& cfg, std::uint64_t trial_index);

    const AdcConfig& config() const { return cfg_; }
    const ComponentRealization& half_split() const { return half_split_; }
    const ComponentRealization& binary() const { return binary_; }
    const MismatchEstimate* estimate() const {
        return estimate_ ? &*estimate_ : nullptr;
    }
    // Effective thresholds seen by the comparator (offset folded in).
    const ReferenceSet& references() const { return refs_; }

    // N-step successive approximation against the mode's references.
    std::int64_t sar_convert(double x);

    // Code edges by bisection of sar_convert to 1/64 LSB; repeated-sample
    // voting stands in for a servo loop when comparator noise is on.
    TransferFunction transfer_function();

private:
    std::int64_t probe(double x);

    AdcConfig cfg_;
    ComponentRealization half_split_;
    ComponentRealization binary_;
    std::optional<MismatchEstimate> estimate_;
    ReferenceSet refs_;
    rng::Stream noise_;
    std::uint64_t noise_counter_ = 0;
};

struct DistributionSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t count = 0;
};

DistributionSummary summarize(std::vector<double> values);

// Entropy of the realized reference set, per trial.
DistributionSummary enob_estimate(const AdcConfig& cfg, int trials,
                                  bool parallel = true);

} // namespace rsq
