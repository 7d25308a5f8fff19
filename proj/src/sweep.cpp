#include "rsq/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

#include "rsq/errors.hpp"

namespace rsq {

namespace {

SweepRow run_trial(const SweepCell& cell, int trial, std::uint64_t seed) {
    SweepRow row;
    row.cell = cell;
    row.trial = trial;
    try {
        AdcConfig cfg;
        cfg.resolution_bits = cell.resolution_bits;
        cfg.mode = cell.mode;
        cfg.sigma0 = cell.sigma0;
        cfg.seed = seed;
        AdcTrial t(cfg, static_cast<std::uint64_t>(trial));
        const auto m = metrics_of(t.references());
        row.entropy_bits = m.entropy_bits;
        row.mqr = m.mqr;
        const auto profile = error_profile(t.references());
        row.wide_codes = profile.wide_code_count;
        const auto tf = transfer_from_references(t.references());
        row.missing_codes = static_cast<std::int64_t>(tf.missing_codes.size());
        const auto lin = dnl_inl(tf);
        row.max_abs_dnl = lin.max_abs_dnl;
        row.max_abs_inl = lin.max_abs_inl;
        row.ok = true;
    } catch (const CapacityError& e) {
        row.error = e.what();
    } catch (const ValidationError& e) {
        row.error = e.what();
    }
    return row;
}

} // namespace

std::vector<SweepRow> monte_carlo_sweep(const std::vector<SweepCell>& cells,
                                        int trials, std::uint64_t seed,
                                        bool parallel) {
    if (trials < 1) throw ValidationError("monte_carlo_sweep: trials must be >= 1");
    std::vector<SweepRow> rows(cells.size() * static_cast<std::size_t>(trials));
    const auto total = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t k = 0; k < total; ++k) {
        const auto c = static_cast<std::size_t>(k) / static_cast<std::size_t>(trials);
        const int trial = static_cast<int>(k % trials);
        rows[static_cast<std::size_t>(k)] = run_trial(cells[c], trial, seed);
    }
    return rows;
}

std::string sweep_csv_header() {
    return "n,sigma0,mode,trial,ok,entropy_bits,mqr,max_abs_dnl,max_abs_inl,"
           "wide_codes,missing_codes,error";
}

std::string sweep_row_csv(const SweepRow& row) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%d,%.9g,%s,%d,%d,%.12g,%.12g,%.12g,%.12g,%lld,%lld,%s",
                  row.cell.resolution_bits, row.cell.sigma0,
                  to_string(row.cell.mode).c_str(), row.trial, row.ok ? 1 : 0,
                  row.entropy_bits, row.mqr, row.max_abs_dnl, row.max_abs_inl,
                  static_cast<long long>(row.wide_codes),
                  static_cast<long long>(row.missing_codes), row.error.c_str());
    return buf;
}

std::string sweep_summary_json(const std::vector<SweepRow>& rows) {
    struct Key {
        int n;
        double sigma0;
        std::string mode;
        bool operator<(const Key& o) const {
            return std::tie(n, sigma0, mode) < std::tie(o.n, o.sigma0, o.mode);
        }
    };
    std::map<Key, std::vector<const SweepRow*>> cells;
    for (const auto& r : rows)
        cells[{r.cell.resolution_bits, r.cell.sigma0, to_string(r.cell.mode)}]
            .push_back(&r);

    nlohmann::json out;
    out["schema"] = "sweep-summary/1";
    out["cells"] = nlohmann::json::array();
    for (const auto& [key, cell_rows] : cells) {
        std::vector<double> h, mqr, dnl, inl, wide;
        std::string error;
        for (const auto* r : cell_rows) {
            if (!r->ok) {
                error = r->error;
                continue;
            }
            h.push_back(r->entropy_bits);
            mqr.push_back(r->mqr);
            dnl.push_back(r->max_abs_dnl);
            inl.push_back(r->max_abs_inl);
            wide.push_back(static_cast<double>(r->wide_codes));
        }
        auto q = [](const DistributionSummary& s) {
            return nlohmann::json{{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
        };
        nlohmann::json jc;
        jc["n"] = key.n;
        jc["sigma0"] = key.sigma0;
        jc["mode"] = key.mode;
        jc["trials_ok"] = h.size();
        if (!error.empty()) jc["error"] = error;
        if (!h.empty()) {
            jc["entropy_bits"] = q(summarize(h));
            jc["mqr"] = q(summarize(mqr));
            jc["max_abs_dnl"] = q(summarize(dnl));
            jc["max_abs_inl"] = q(summarize(inl));
            jc["wide_codes"] = q(summarize(wide));
        }
        out["cells"].push_back(std::move(jc));
    }
    return out.dump(2);
}

ErrorDistribution error_distribution(int resolution_bits, double sigma0,
                                     int trials, std::uint64_t seed,
                                     bool parallel) {
    if (trials < 1) throw ValidationError("error_distribution: trials must be >= 1");
    const std::size_t codes = std::size_t{1} << resolution_bits;

    struct Partial {
        std::vector<double> sum, sumsq, sumabs, sumpd;
        std::int64_t wide = 0;
    };
    // A fixed block count keeps the reduction order independent of the
    // number of threads.
    const int blocks = std::min(16, trials);
    std::vector<Partial> parts(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int b = 0; b < blocks; ++b) {
        Partial& p = parts[static_cast<std::size_t>(b)];
        p.sum.assign(codes, 0.0);
        p.sumsq.assign(codes, 0.0);
        p.sumabs.assign(codes, 0.0);
        p.sumpd.assign(codes, 0.0);
        const int lo = trials * b / blocks;
        const int hi = trials * (b + 1) / blocks;
        const GeometricIdentity id{resolution_bits, {}};
        const auto nominal = build_binary_set(resolution_bits);
        for (int t = lo; t < hi; ++t) {
            const auto real = sample_realization(
                nominal, sigma0,
                rng::Stream(seed).fork(static_cast<std::uint64_t>(t)).fork(1));
            const auto refs = binary_reference_set(real);
            const auto prof = error_profile(refs);
            for (std::size_t i = 0; i < codes; ++i) {
                const double e = prof.absolute_error[i];
                p.sum[i] += e;
                p.sumsq[i] += e * e;
                p.sumabs[i] += std::fabs(e);
                p.sumpd[i] += prof.differential_gap[i];
            }
            p.wide += prof.wide_code_count;
        }
    }

    ErrorDistribution d;
    d.resolution_bits = resolution_bits;
    d.sigma0 = sigma0;
    d.trials = trials;
    d.var_pe.assign(codes, 0.0);
    d.mean_abs_pe.assign(codes, 0.0);
    d.theory_var.assign(codes, 0.0);
    d.mean_pd.assign(codes, 0.0);
    std::vector<double> sum(codes, 0.0);
    std::int64_t wide = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < codes; ++i) {
            sum[i] += p.sum[i];
            d.var_pe[i] += p.sumsq[i];
            d.mean_abs_pe[i] += p.sumabs[i];
            d.mean_pd[i] += p.sumpd[i];
        }
        wide += p.wide;
    }
    const auto tn = static_cast<double>(trials);
    for (std::size_t i = 0; i < codes; ++i) {
        const double mean = sum[i] / tn;
        d.var_pe[i] = d.var_pe[i] / tn - mean * mean;
        d.mean_abs_pe[i] /= tn;
        d.mean_pd[i] /= tn;
        d.theory_var[i] = theoretical_error_variance(static_cast<std::int64_t>(i),
                                                     resolution_bits, sigma0);
    }
    d.wide_code_rate = static_cast<double>(wide) / tn;
    return d;
}

} // namespace rsq
