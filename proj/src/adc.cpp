#include "rsq/adc.hpp"

#include <algorithm>
#include <cmath>

#include "rsq/assembly_search.hpp"
#include "rsq/errors.hpp"

namespace rsq {

std::string to_string(ConversionMode mode) {
    switch (mode) {
        case ConversionMode::binary: return "binary";
        case ConversionMode::heuristic_calibrated: return "heuristic";
        case ConversionMode::oracle_optimal: return "oracle";
    }
    return "?";
}

ConversionMode conversion_mode_from_string(const std::string& s) {
    if (s == "binary") return ConversionMode::binary;
    if (s == "heuristic" || s == "heuristic-calibrated")
        return ConversionMode::heuristic_calibrated;
    if (s == "oracle" || s == "oracle-optimal") return ConversionMode::oracle_optimal;
    throw ValidationError("unknown conversion mode: " + s);
}

LinearityResult dnl_inl(const TransferFunction& tf) {
    const auto& t = tf.code_edges;
    LinearityResult r;
    if (t.size() < 2) return r;
    r.dnl.resize(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        r.dnl[i] = t[i + 1] - t[i] - 1.0;
        r.max_abs_dnl = std::max(r.max_abs_dnl, std::fabs(r.dnl[i]));
    }
    // End-point fit through the first and last edge.
    const double first = t.front();
    const double slope = (t.back() - first) / static_cast<double>(t.size() - 1);
    r.inl.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        r.inl[i] = t[i] - (first + slope * static_cast<double>(i));
        r.max_abs_inl = std::max(r.max_abs_inl, std::fabs(r.inl[i]));
    }
    return r;
}

TransferFunction transfer_from_references(const ReferenceSet& refs) {
    TransferFunction tf;
    tf.resolution_bits = refs.resolution_bits();
    const auto codes = refs.code_count();
    tf.code_edges.resize(static_cast<std::size_t>(codes) - 1);
    for (std::int64_t i = 1; i < codes; ++i)
        tf.code_edges[static_cast<std::size_t>(i) - 1] = refs.threshold(i);
    for (std::int64_t i = 0; i < codes; ++i) {
        const double lo = (i == 0) ? 0.0 : tf.edge(i);
        const double hi = (i == codes - 1) ? static_cast<double>(codes) : tf.edge(i + 1);
        if (hi - lo <= 0.0) tf.missing_codes.push_back(i);
        if (i >= 1 && i < codes - 1 && tf.edge(i + 1) < tf.edge(i))
            tf.non_monotone.push_back(i);
    }
    return tf;
}

AdcTrial::AdcTrial(const AdcConfig& cfg, std::uint64_t trial_index)
    : cfg_(cfg),
      half_split_(build_binary_set(std::max(cfg.resolution_bits, 1))),
      binary_(half_split_),
      refs_(ReferenceSet::ideal(1)), // placeholder until the mode path runs
      noise_(rng::Stream(cfg.seed).fork(trial_index).fork(3)) {
    const int n = cfg.resolution_bits;
    const auto trial_stream = rng::Stream(cfg.seed).fork(trial_index);
    if (n >= 2) {
        const GeometricIdentity id{n, {{n - 1, 1}}};
        half_split_ =
            sample_realization(build_redundant_sets(id), cfg.sigma0, trial_stream.fork(1));
        binary_ = merge_to_binary(half_split_);
    } else {
        if (cfg.mode != ConversionMode::binary)
            throw ValidationError("AdcTrial: redundant modes need N >= 2");
        half_split_ =
            sample_realization(build_binary_set(n), cfg.sigma0, trial_stream.fork(1));
        binary_ = half_split_;
    }

    ReferenceSet raw = refs_;
    switch (cfg.mode) {
        case ConversionMode::binary:
            raw = binary_reference_set(binary_);
            break;
        case ConversionMode::oracle_optimal:
            raw = optimal_reference_thresholds(half_split_, /*parallel=*/false);
            break;
        case ConversionMode::heuristic_calibrated: {
            double bridge = 1.0;
            if (cfg.sigma0_bridge > 0.0) {
                const auto bs = trial_stream.fork(2);
                std::uint64_t draw = 0;
                bridge = bs.normal(draw, 1.0, cfg.sigma0_bridge);
                while (bridge <= 0.0) bridge = bs.normal(++draw, 1.0, cfg.sigma0_bridge);
            }
            HalfSplitArray array{half_split_, 4, cfg.v_co, bridge,
                                 MeasurementMode::behavioral};
            estimate_ = estimate_mismatch(array);
            raw = calibrated_reference_set(half_split_, *estimate_);
            break;
        }
    }

    if (cfg.v_co != 0.0) {
        // Fold the comparator offset into the thresholds the input is
        // effectively compared against.
        std::vector<double> t = raw.thresholds();
        for (std::size_t i = 1; i + 1 < t.size(); ++i) t[i] -= cfg.v_co;
        refs_ = ReferenceSet(n, std::move(t));
    } else {
        refs_ = std::move(raw);
    }
}

std::int64_t AdcTrial::sar_convert(double x) {
    const int n = cfg_.resolution_bits;
    std::int64_t code = 0;
    for (int k = n - 1; k >= 0; --k) {
        const std::int64_t trial = code | (std::int64_t{1} << k);
        double lhs = x;
        if (cfg_.comparator_noise_sigma > 0.0)
            lhs += noise_.normal(noise_counter_++, 0.0, cfg_.comparator_noise_sigma);
        if (lhs >= refs_.threshold(trial)) code = trial;
    }
    return code;
}

std::int64_t AdcTrial::probe(double x) {
    if (cfg_.comparator_noise_sigma <= 0.0) return sar_convert(x);
    std::vector<std::int64_t> votes(15);
    for (auto& v : votes) v = sar_convert(x);
    std::nth_element(votes.begin(), votes.begin() + 7, votes.end());
    return votes[7];
}

TransferFunction AdcTrial::transfer_function() {
    const int n = cfg_.resolution_bits;
    const auto codes = std::int64_t{1} << n;
    const double fr = static_cast<double>(codes);
    const double tol = 1.0 / 64.0;
    TransferFunction tf;
    tf.resolution_bits = n;
    tf.code_edges.resize(static_cast<std::size_t>(codes) - 1);
    const double top = fr - fr * 0x1.0p-40;
    for (std::int64_t i = 1; i < codes; ++i) {
        double lo = 0.0, hi = fr;
        if (probe(0.0) >= i) {
            tf.code_edges[static_cast<std::size_t>(i) - 1] = 0.0;
            continue;
        }
        if (probe(top) < i) {
            tf.code_edges[static_cast<std::size_t>(i) - 1] = fr;
            continue;
        }
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (probe(mid) >= i) hi = mid; else lo = mid;
        }
        tf.code_edges[static_cast<std::size_t>(i) - 1] = 0.5 * (lo + hi);
    }
    for (std::int64_t i = 0; i < codes; ++i) {
        const double lo = (i == 0) ? 0.0 : tf.edge(i);
        const double hi = (i == codes - 1) ? fr : tf.edge(i + 1);
        if (hi - lo <= tol) tf.missing_codes.push_back(i);
        if (i >= 1 && i < codes - 1 && tf.edge(i + 1) < tf.edge(i))
            tf.non_monotone.push_back(i);
    }
    return tf;
}

DistributionSummary summarize(std::vector<double> values) {
    DistributionSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    return s;
}

DistributionSummary enob_estimate(const AdcConfig& cfg, int trials, bool parallel) {
    if (trials < 1) throw ValidationError("enob_estimate: trials must be >= 1");
    std::vector<double> h(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int t = 0; t < trials; ++t) {
        AdcTrial trial(cfg, static_cast<std::uint64_t>(t));
        h[static_cast<std::size_t>(t)] = metrics_of(trial.references()).entropy_bits;
    }
    return summarize(std::move(h));
}

} // namespace rsq
