#pragma once

#include <cstdint>
#include <vector>

namespace rsq {

// Thresholds of an N-bit quantizer in LSB units over the full range
// [0, 2^N]. Holds 2^N + 1 values; the last one is the dummy full-range
// reference pinned to 2^N.
class ReferenceSet {
public:
    ReferenceSet(int resolution_bits, std::vector<double> thresholds);

    int resolution_bits() const { return n_bits_; }
    std::int64_t code_count() const { return std::int64_t{1} << n_bits_; }
    const std::vector<double>& thresholds() const { return thresholds_; }
    double threshold(std::int64_t i) const { return thresholds_[static_cast<std::size_t>(i)]; }
    bool is_monotone() const { return is_monotone_; }

    // The ideal set: theta_i = i.
    static ReferenceSet ideal(int resolution_bits);

private:
    int n_bits_;
    std::vector<double> thresholds_;
    bool is_monotone_;
};

struct QuantizerMetrics {
    double mse = 0.0;                // M, normalized total mean square error
    double quantization_noise = 0.0; // Q = 2^(-2N)/12
    double entropy_bits = 0.0;       // H = -log2 sqrt(12 M)
    double mqr = 0.0;                // (M - Q)/Q
};

struct ErrorProfile {
    std::vector<double> absolute_error;   // P_E(i) = theta_i - i
    std::vector<double> differential_gap; // P_D(i) = theta_{i+1} - theta_i
    std::int64_t wide_code_count = 0;     // gaps exceeding two LSB
};

// Digital code of x per the left-closed convention theta_i <= x < theta_{i+1}.
// Non-monotone sets are resolved by the documented missing-code policy: the
// smallest i whose non-empty region contains x.
std::int64_t quantize(double x, const ReferenceSet& refs);

// Normalized total mean square error, closed form per region. Inverted
// intervals (theta_{i+1} < theta_i) contribute zero, i.e. missing codes.
double total_mse(const ReferenceSet& refs);

double entropy_of(double mse, int resolution_bits);
double mqr_of(double mse, int resolution_bits);

QuantizerMetrics metrics_of(const ReferenceSet& refs);

ErrorProfile error_profile(const ReferenceSet& refs);

} // namespace rsq
