#include "rsq/reference_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsq {

ReferenceSet::ReferenceSet(int resolution_bits, std::vector<double> thresholds)
    : n_bits_(resolution_bits), thresholds_(std::move(thresholds)) {
    if (n_bits_ < 1 || n_bits_ > 30)
        throw std::invalid_argument("ReferenceSet: resolution out of range");
    const auto m = static_cast<std::size_t>(code_count());
    if (thresholds_.size() != m + 1)
        throw std::invalid_argument("ReferenceSet: expected 2^N + 1 thresholds");
    if (thresholds_.front() != 0.0)
        throw std::invalid_argument("ReferenceSet: theta_0 must be 0");
    if (thresholds_.back() != static_cast<double>(code_count()))
        throw std::invalid_argument("ReferenceSet: theta_{2^N} must be 2^N");
    is_monotone_ = std::is_sorted(thresholds_.begin(), thresholds_.end());
}

ReferenceSet ReferenceSet::ideal(int resolution_bits) {
    const auto m = std::size_t{1} << resolution_bits;
    std::vector<double> t(m + 1);
    for (std::size_t i = 0; i <= m; ++i) t[i] = static_cast<double>(i);
    return ReferenceSet(resolution_bits, std::move(t));
}

std::int64_t quantize(double x, const ReferenceSet& refs) {
    const double fr = static_cast<double>(refs.code_count());
    if (!(x >= 0.0 && x < fr))
        throw std::out_of_range("quantize: input outside [0, 2^N)");
    const auto& t = refs.thresholds();
    if (refs.is_monotone()) {
        // Largest i with theta_i <= x; empty regions are skipped by taking
        // the last of any run of equal thresholds.
        auto it = std::upper_bound(t.begin(), t.end(), x);
        return static_cast<std::int64_t>(it - t.begin()) - 1;
    }
    // Missing-code policy: the running-max envelope makes regions disjoint
    // and total; the containing envelope region is the smallest i with
    // theta_i <= x < theta_{i+1}.
    double env = t[0];
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        env = std::max(env, t[i]);
        const double next = std::max(env, t[i + 1]);
        if (env <= x && x < next) return static_cast<std::int64_t>(i);
    }
    return refs.code_count() - 1;
}

double total_mse(const ReferenceSet& refs) {
    const auto& t = refs.thresholds();
    const int n = refs.resolution_bits();
    double sum = 0.0;
    for (std::int64_t i = 0; i < refs.code_count(); ++i) {
        const double a = t[static_cast<std::size_t>(i)];
        const double b = t[static_cast<std::size_t>(i) + 1];
        if (b <= a) continue; // inverted or empty region: missing code
        const double mid = static_cast<double>(i) + 0.5;
        const double hi = b - mid;
        const double lo = a - mid;
        sum += (hi * hi * hi - lo * lo * lo) / 3.0;
    }
    return std::ldexp(sum, -3 * n);
}

double entropy_of(double mse, int resolution_bits) {
    if (!(mse > 0.0)) throw std::domain_error("entropy_of: M must be positive");
    const double q = std::ldexp(1.0 / 12.0, -2 * resolution_bits);
    // H = -log2 sqrt(12 M), written so M == Q gives H == N exactly.
    return resolution_bits - 0.5 * std::log2(mse / q);
}

double mqr_of(double mse, int resolution_bits) {
    const double q = std::ldexp(1.0 / 12.0, -2 * resolution_bits);
    return (mse - q) / q;
}

QuantizerMetrics metrics_of(const ReferenceSet& refs) {
    QuantizerMetrics m;
    m.mse = total_mse(refs);
    m.quantization_noise = std::ldexp(1.0 / 12.0, -2 * refs.resolution_bits());
    m.entropy_bits = entropy_of(m.mse, refs.resolution_bits());
    m.mqr = mqr_of(m.mse, refs.resolution_bits());
    return m;
}

ErrorProfile error_profile(const ReferenceSet& refs) {
    const auto& t = refs.thresholds();
    const auto m = static_cast<std::size_t>(refs.code_count());
    ErrorProfile p;
    p.absolute_error.resize(m);
    p.differential_gap.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        p.absolute_error[i] = t[i] - static_cast<double>(i);
        p.differential_gap[i] = t[i + 1] - t[i];
        if (p.differential_gap[i] > 2.0) ++p.wide_code_count;
    }
    return p;
}

} // namespace rsq
