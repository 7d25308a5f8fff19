#include "rsq/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "rsq/adc.hpp"
#include "rsq/assembly_search.hpp"
#include "rsq/calibration.hpp"
#include "rsq/components.hpp"
#include "rsq/reference_set.hpp"
#include "rsq/sweep.hpp"

namespace rsq {

namespace {

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// 1. Ideal quantizer entropy equals the intrinsic resolution.
CriterionResult shannon_limit_identity(std::uint64_t, bool) {
    CriterionResult r{1, "shannon-limit identity H=N (N=1..20, sigma0=0)"};
    double worst = 0.0;
    for (int n = 1; n <= 20; ++n) {
        const auto m = metrics_of(ReferenceSet::ideal(n));
        worst = std::max(worst, std::fabs(m.entropy_bits - n));
    }
    r.pass = worst <= 1e-9;
    r.detail = fmt("max |H-N| = %.3g (limit 1e-9)", worst);
    return r;
}

// 2. Binary coding: entropy falls further behind N as N grows.
CriterionResult entropy_degeneration(std::uint64_t seed, bool parallel) {
    CriterionResult r{2, "entropy degeneration grows with N (binary, sigma0=10%)"};
    const std::vector<int> ns{8, 12, 16};
    std::vector<SweepCell> cells;
    for (int n : ns) cells.push_back({n, 0.10, ConversionMode::binary});
    const auto rows = monte_carlo_sweep(cells, 500, seed, parallel);
    std::vector<double> degen;
    for (std::size_t c = 0; c < ns.size(); ++c) {
        std::vector<double> h;
        for (int t = 0; t < 500; ++t) {
            const auto& row = rows[c * 500 + static_cast<std::size_t>(t)];
            if (row.ok) h.push_back(row.entropy_bits);
        }
        degen.push_back(ns[c] - summarize(h).median);
    }
    r.pass = degen[0] < degen[1] && degen[1] < degen[2];
    r.detail = fmt("median N-H: %.3f (N=8) %.3f (N=12) %.3f (N=16)", degen[0],
                   degen[1], degen[2]);
    return r;
}

// 3. Optimal assemblies push mismatch error below quantization noise.
CriterionResult mismatch_suppression(std::uint64_t seed, bool parallel) {
    CriterionResult r{3, "oracle-optimal median MQR < 1 (N0=8,10, sigma0=10%)"};
    r.pass = true;
    for (int n : {8, 10}) {
        std::vector<double> mqr(100);
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (int t = 0; t < 100; ++t) {
            AdcConfig cfg;
            cfg.resolution_bits = n;
            cfg.mode = ConversionMode::oracle_optimal;
            cfg.sigma0 = 0.10;
            cfg.seed = seed;
            AdcTrial trial(cfg, static_cast<std::uint64_t>(t));
            mqr[static_cast<std::size_t>(t)] = metrics_of(trial.references()).mqr;
        }
        const double med = summarize(mqr).median;
        r.pass = r.pass && med < 1.0;
        r.detail += fmt("N0=%d median MQR=%.3f  ", n, med);
    }
    return r;
}

// 4. Mid-range codes carry the mismatch error, variance per the closed form.
CriterionResult midrange_error_concentration(std::uint64_t seed, bool parallel) {
    CriterionResult r{4, "Var[P_E] matches closed form, mid-quartile codes (N=16)"};
    const int n = 16;
    const auto d = error_distribution(n, 0.10, 10000, seed, parallel);
    const std::int64_t codes = std::int64_t{1} << n;
    double worst_rel = 0.0;
    for (std::int64_t i = codes / 4; i < 3 * codes / 4; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double rel =
            std::fabs(d.var_pe[idx] - d.theory_var[idx]) / d.theory_var[idx];
        worst_rel = std::max(worst_rel, rel);
    }
    const double var_lo = d.var_pe.front();
    const double var_hi = d.var_pe[static_cast<std::size_t>(codes) - 1];
    r.pass = worst_rel <= 0.10 && var_lo == 0.0 && var_hi == 0.0;
    r.detail = fmt("max relative deviation %.3f (limit 0.10), endpoint vars %g, %g",
                   worst_rel, var_lo, var_hi);
    return r;
}

// 5. Assembly counts: totals, symmetry, and DP vs literal enumeration.
CriterionResult redundancy_accounting(std::uint64_t, bool) {
    CriterionResult r{5, "assembly counts: total 2^(N0+N1), symmetry, DP=oracle"};
    r.pass = true;
    for (int n1 = 1; n1 <= 7 && r.pass; ++n1) {
        for (int s1 = 1; s1 <= 8 - n1 && r.pass; ++s1) {
            const GeometricIdentity id{8, {{n1, s1}}};
            const auto counts = assembly_count_profile(id);
            std::uint64_t total = 0;
            for (auto c : counts) total += c;
            if (total != (std::uint64_t{1} << (8 + n1))) {
                r.pass = false;
                r.detail = fmt("total mismatch at %s", id.to_string().c_str());
            }
            for (std::size_t i = 0; i < counts.size(); ++i)
                if (counts[i] != counts[counts.size() - 1 - i]) {
                    r.pass = false;
                    r.detail = fmt("asymmetry at %s", id.to_string().c_str());
                    break;
                }
        }
    }
    // Literal power-set oracle at N0 <= 6.
    for (int n0 = 2; n0 <= 6 && r.pass; ++n0) {
        for (int n1 = 1; n1 <= n0 - 1 && r.pass; ++n1) {
            for (int s1 = 1; s1 <= n0 - n1 && r.pass; ++s1) {
                const GeometricIdentity id{n0, {{n1, s1}}};
                const auto counts = assembly_count_profile(id);
                const auto real = build_redundant_sets(id);
                std::vector<std::uint64_t> brute(counts.size(), 0);
                const auto subsets = std::uint64_t{1} << real.component_count();
                for (std::uint64_t m = 0; m < subsets; ++m) {
                    std::int64_t sum = 0;
                    for (int c = 0; c < real.component_count(); ++c)
                        if ((m >> c) & 1)
                            sum += real.nominal()[static_cast<std::size_t>(c)];
                    ++brute[static_cast<std::size_t>(sum)];
                }
                if (brute != counts) {
                    r.pass = false;
                    r.detail = fmt("DP != enumeration at %s", id.to_string().c_str());
                }
            }
        }
    }
    if (r.pass) r.detail = "all N0=8 identities + oracle N0<=6";
    return r;
}

// 6. The 14.(13,1) nominal weights are the half-split arrays.
CriterionResult half_split_reproduction(std::uint64_t, bool) {
    CriterionResult r{6, "half-split nominal weights of 14.(13,1)"};
    const auto real = build_redundant_sets(GeometricIdentity{14, {{13, 1}}});
    std::vector<std::int64_t> primary, secondary;
    for (int i = 0; i < real.set_size(0); ++i) primary.push_back(real.nominal_of(0, i));
    for (int j = 0; j < real.set_size(1); ++j) secondary.push_back(real.nominal_of(1, j));
    std::vector<std::int64_t> want_p{1}, want_s;
    for (int i = 0; i <= 12; ++i) want_p.push_back(std::int64_t{1} << i);
    for (int i = 0; i <= 12; ++i) want_s.push_back(std::int64_t{1} << i);
    r.pass = primary == want_p && secondary == want_s;
    r.detail = r.pass ? "exact match" : "weights differ";
    return r;
}

// 7. Estimation fidelity: exact in ideal mode, bounded in behavioral mode.
CriterionResult estimation_fidelity(std::uint64_t seed, bool parallel) {
    CriterionResult r{7, "mismatch estimation: ideal exact, behavioral <= 1 LSB"};
    const GeometricIdentity id{14, {{13, 1}}};
    const auto nominal = build_redundant_sets(id);

    double worst_ideal = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto real = sample_realization(
            nominal, 0.03, rng::Stream(seed).fork(0x1dea).fork(static_cast<std::uint64_t>(t)));
        HalfSplitArray arr{real, 4, 0.0, 1.0, MeasurementMode::ideal};
        const auto est = estimate_mismatch(arr, /*use_fixed_point=*/false);
        const auto truth = true_mismatch(real);
        for (std::size_t c = 0; c < truth.size(); ++c)
            worst_ideal = std::max(
                worst_ideal, std::fabs(est.eps_exact[c] - truth[c]));
    }

    double worst_behavioral = 0.0;
    double worst_sum = 0.0;
    const int trials = 100;
    std::vector<double> max_err(trials), sums(trials);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int t = 0; t < trials; ++t) {
        const auto real = sample_realization(
            nominal, 0.02, rng::Stream(seed).fork(0xbe4a).fork(static_cast<std::uint64_t>(t)));
        HalfSplitArray arr{real, 4, 0.0, 1.0, MeasurementMode::behavioral};
        const auto est = estimate_mismatch(arr);
        const auto truth = true_mismatch(real);
        double m = 0.0;
        for (std::size_t c = 0; c < truth.size(); ++c)
            m = std::max(m, std::fabs(est.eps(static_cast<int>(c)) - truth[c]));
        max_err[static_cast<std::size_t>(t)] = m;
        sums[static_cast<std::size_t>(t)] = std::fabs(est.eps_sum());
    }
    for (int t = 0; t < trials; ++t) {
        worst_behavioral = std::max(worst_behavioral, max_err[static_cast<std::size_t>(t)]);
        worst_sum = std::max(worst_sum, sums[static_cast<std::size_t>(t)]);
    }
    const double sum_limit = 27.0 / 16.0; // one quantum per stored entry
    r.pass = worst_ideal <= 1e-9 && worst_behavioral <= 1.0 && worst_sum <= sum_limit;
    r.detail = fmt("ideal max err %.2e, behavioral max err %.3f LSB, max |sum eps| %.3f",
                   worst_ideal, worst_behavioral, worst_sum);
    return r;
}

// 8. The O(N) heuristic never beats the exact optimum and beats binary.
CriterionResult heuristic_vs_oracle(std::uint64_t seed, bool parallel) {
    CriterionResult r{8, "heuristic bounded by oracle, M_h <= M_b in >=95% (8.(7,1))"};
    const GeometricIdentity id{8, {{7, 1}}};
    const auto nominal = build_redundant_sets(id);
    const int trials = 20;
    int dominance_ok = 0, beats_binary = 0;
    double worst_gap = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto real = sample_realization(
            nominal, 0.10, rng::Stream(seed).fork(0x8e0).fork(static_cast<std::uint64_t>(t)));
        HalfSplitArray arr{real, 4, 0.0, 1.0, MeasurementMode::behavioral};
        const auto est = estimate_mismatch(arr);
        const auto heur = calibrated_reference_set(real, est);
        const auto oracle = optimal_reference_set(real, parallel);
        bool dominated = true;
        for (std::int64_t i = 0; i < 256; ++i) {
            // The comparison is between assemblies: the heuristic's chosen
            // component subset against the exact minimum over all subsets.
            // The analog trims sit outside that search space.
            const auto ca = calibrated_assembly(i, est);
            const double eh =
                std::fabs(reference_of(ca.effective(), real) - static_cast<double>(i));
            const double eo = oracle.achieved_error[static_cast<std::size_t>(i)];
            worst_gap = std::min(worst_gap, eh - eo);
            if (eh < eo - 1e-9) dominated = false;
        }
        dominance_ok += dominated ? 1 : 0;
        const double m_h = total_mse(heur);
        const double m_b = total_mse(binary_reference_set(merge_to_binary(real)));
        beats_binary += (m_h <= m_b) ? 1 : 0;
    }
    r.pass = dominance_ok == trials && beats_binary >= 19;
    r.detail = fmt("dominance %d/%d, M_h<=M_b %d/%d, min(e_h - e_o)=%.2e",
                   dominance_ok, trials, beats_binary, trials, worst_gap);
    return r;
}

struct GainStats {
    double inl_ratio_median;
    double enob_gain_median;
};

GainStats calibration_gain(std::uint64_t seed, bool parallel) {
    const int trials = 50;
    std::vector<double> inl_ratio(trials), enob_gain(trials);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int t = 0; t < trials; ++t) {
        AdcConfig cfg;
        cfg.resolution_bits = 14;
        cfg.sigma0 = 0.03;
        cfg.seed = seed;
        cfg.mode = ConversionMode::binary;
        AdcTrial bin(cfg, static_cast<std::uint64_t>(t));
        cfg.mode = ConversionMode::heuristic_calibrated;
        AdcTrial heur(cfg, static_cast<std::uint64_t>(t));
        const auto lin_b = dnl_inl(transfer_from_references(bin.references()));
        const auto lin_h = dnl_inl(transfer_from_references(heur.references()));
        inl_ratio[static_cast<std::size_t>(t)] = lin_b.max_abs_inl / lin_h.max_abs_inl;
        enob_gain[static_cast<std::size_t>(t)] =
            metrics_of(heur.references()).entropy_bits -
            metrics_of(bin.references()).entropy_bits;
    }
    return {summarize(inl_ratio).median, summarize(enob_gain).median};
}

// 9 & 10 share the same Monte Carlo runs.
CriterionResult linearity_gain(const GainStats& g) {
    CriterionResult r{9, "calibration max|INL| improvement >= 4x (N=14, sigma0=3%)"};
    r.pass = g.inl_ratio_median >= 4.0;
    r.detail = fmt("median improvement %.2fx", g.inl_ratio_median);
    return r;
}

CriterionResult resolution_gain(const GainStats& g) {
    CriterionResult r{10, "calibration ENOB gain >= 2 bits (N=14, sigma0=3%)"};
    r.pass = g.enob_gain_median >= 2.0;
    r.detail = fmt("median ENOB gain %.2f bits", g.enob_gain_median);
    return r;
}

// 11. Same seed, same bytes.
CriterionResult determinism(std::uint64_t seed, bool parallel) {
    CriterionResult r{11, "sweep rerun with same seed is byte-identical"};
    const std::vector<SweepCell> cells{{8, 0.05, ConversionMode::binary},
                                       {8, 0.05, ConversionMode::heuristic_calibrated}};
    auto render = [&] {
        std::string out = sweep_csv_header() + "\n";
        for (const auto& row : monte_carlo_sweep(cells, 10, seed, parallel))
            out += sweep_row_csv(row) + "\n";
        return out;
    };
    const std::string a = render();
    const std::string b = render();
    r.pass = a == b;
    r.detail = r.pass ? "identical CSV" : "CSV outputs differ";
    return r;
}

} // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, bool parallel) {
    std::vector<CriterionResult> out;
    auto timed = [&](auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r = fn();
        r.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        out.push_back(std::move(r));
    };
    timed([&] { return shannon_limit_identity(seed, parallel); });
    timed([&] { return entropy_degeneration(seed, parallel); });
    timed([&] { return mismatch_suppression(seed, parallel); });
    timed([&] { return midrange_error_concentration(seed, parallel); });
    timed([&] { return redundancy_accounting(seed, parallel); });
    timed([&] { return half_split_reproduction(seed, parallel); });
    timed([&] { return estimation_fidelity(seed, parallel); });
    timed([&] { return heuristic_vs_oracle(seed, parallel); });
    const auto t0 = std::chrono::steady_clock::now();
    const GainStats g = calibration_gain(seed, parallel);
    const double shared =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto r9 = linearity_gain(g);
    r9.seconds = shared;
    out.push_back(std::move(r9));
    auto r10 = resolution_gain(g);
    out.push_back(std::move(r10));
    timed([&] { return determinism(seed, parallel); });
    return out;
}

bool report_acceptance(const std::vector<CriterionResult>& results) {
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %2d. %s: %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "ALL CRITERIA PASSED" : "ACCEPTANCE FAILURES PRESENT");
    return all;
}

} // namespace rsq
