#include "rsq/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "rsq/errors.hpp"

namespace rsq {

double MismatchEstimate::eps_sum() const {
    double s = 0.0;
    for (int c = 0; c < component_count(); ++c) s += eps(c);
    return s;
}

std::vector<double> true_mismatch(const ComponentRealization& real) {
    const double norm = real.normalization();
    std::vector<double> eps(static_cast<std::size_t>(real.component_count()));
    for (int c = 0; c < real.component_count(); ++c)
        eps[static_cast<std::size_t>(c)] =
            real.actual()[static_cast<std::size_t>(c)] / norm -
            static_cast<double>(real.nominal()[static_cast<std::size_t>(c)]);
    return eps;
}

namespace {

struct Digitizer {
    const std::vector<double>& weights; // normalized actual, global order
    const ComponentRealization& real;
    int sub_dac_bits;
    double bridge_factor;

    // SAR measurement of d through the lower components of both sets
    // (set 0 up to index max0, set 1 up to max1) plus the sub-DAC.
    double measure(double d, int max0, int max1) const {
        const double sign = d < 0.0 ? -1.0 : 1.0;
        const double mag = std::fabs(d);
        // (nominal, global index) descending by weight
        std::vector<std::pair<std::int64_t, int>> comps;
        for (int i = 0; i <= max0; ++i)
            comps.emplace_back(real.nominal_of(0, i), real.global_index(0, i));
        for (int j = 0; j <= max1; ++j)
            comps.emplace_back(real.nominal_of(1, j), real.global_index(1, j));
        std::sort(comps.begin(), comps.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        double acc = 0.0;
        double measured = 0.0;
        for (const auto& [nom, g] : comps) {
            const double w = weights[static_cast<std::size_t>(g)];
            if (acc + w <= mag) {
                acc += w;
                measured += static_cast<double>(nom);
            }
        }
        // Half-step offset injection makes the sub-DAC round instead of
        // truncate; a systematic truncation bias would otherwise be
        // amplified by the recursive integration.
        const double step = bridge_factor / 16.0;
        const auto max_code = (std::int64_t{1} << sub_dac_bits) - 1;
        const auto sub = std::min<std::int64_t>(
            static_cast<std::int64_t>(std::floor((mag - acc) / step + 0.5)), max_code);
        measured += static_cast<double>(std::max<std::int64_t>(sub, 0)) / 16.0;
        return sign * measured;
    }
};

} // namespace

MismatchEstimate estimate_mismatch(const HalfSplitArray& array,
                                   bool use_fixed_point) {
    const auto& real = array.realization;
    if (!real.identity().is_half_split())
        throw ValidationError("estimate_mismatch: identity is not half-split");
    const int n = real.identity().primary_bits;
    const double norm = real.normalization();
    std::vector<double> w(static_cast<std::size_t>(real.component_count()));
    for (int c = 0; c < real.component_count(); ++c)
        w[static_cast<std::size_t>(c)] = real.actual()[static_cast<std::size_t>(c)] / norm;

    MismatchEstimate est;
    est.resolution_bits = n;
    est.fixed_point = use_fixed_point;

    const bool behavioral = array.mode == MeasurementMode::behavioral;
    // Offset is nulled by the opposing branch before estimation; behavioral
    // nulling resolves it at sub-DAC precision, leaving a small residue.
    est.v_co_estimate =
        behavioral ? std::llround(array.comparator_offset * 16.0) / 16.0
                   : array.comparator_offset;
    const double offset_residue =
        behavioral ? array.comparator_offset - est.v_co_estimate : 0.0;
    const Digitizer dig{w, real, array.sub_dac_bits, array.bridge_factor};

    auto w0 = [&](int i) { return w[static_cast<std::size_t>(real.global_index(0, i))]; };
    auto w1 = [&](int j) { return w[static_cast<std::size_t>(real.global_index(1, j))]; };

    // Recursive integration: eps'_{0,0} assumed 0, each iteration adds the
    // measured difference to the previously integrated pair.
    std::vector<double> eps_p(static_cast<std::size_t>(2 * n - 1), 0.0);
    auto ep0 = [&](int i) -> double& { return eps_p[static_cast<std::size_t>(i)]; };
    auto ep1 = [&](int j) -> double& { return eps_p[static_cast<std::size_t>(n + j)]; };
    for (int i = 1; i <= n - 1; ++i) {
        const double prev = w0(i - 1) + (i >= 2 ? w1(i - 2) : 0.0);
        double d0 = w0(i) - prev;
        double d1 = w1(i - 1) - prev;
        if (behavioral) {
            d0 = dig.measure(d0 + offset_residue, i - 2, i - 3);
            d1 = dig.measure(d1 + offset_residue, i - 2, i - 3);
        }
        est.raw_differences.push_back(d0);
        est.raw_differences.push_back(d1);
        const double base = ep0(i - 1) + (i >= 2 ? ep1(i - 2) : 0.0);
        ep0(i) = base + d0;
        ep1(i - 1) = base + d1;
    }
    // Bias correction: the eps'_{0,0} = 0 assumption biases every entry by
    // its nominal weight times the true eps_{0,0}, and the recursion also
    // amplifies measurement error in proportion to weight; distributing the
    // total S in proportion to nominal weight removes both and makes the
    // sum zero. Only the corrected values must fit the storage range.
    double s = 0.0;
    for (double e : eps_p) s += e;
    const double full = static_cast<double>((std::int64_t{1} << n) - 1);
    est.eps_exact.resize(eps_p.size());
    est.eps_raw.resize(eps_p.size());
    for (int c = 0; c < real.component_count(); ++c) {
        const double corrected =
            eps_p[static_cast<std::size_t>(c)] -
            s * static_cast<double>(real.nominal()[static_cast<std::size_t>(c)]) / full;
        if (std::fabs(corrected) > 32.0)
            throw EstimationDivergence("estimate_mismatch: estimate out of the "
                                       "storage range");
        est.eps_exact[static_cast<std::size_t>(c)] = corrected;
        bool sat = false;
        est.eps_raw[static_cast<std::size_t>(c)] = FixedPoint10::encode(corrected, &sat);
        if (sat) ++est.saturation_events;
    }
    return est;
}

Assembly map_and_shift(std::int64_t code, const GeometricIdentity& identity) {
    const ComponentRealization nominal =
        identity.is_binary() ? build_binary_set(identity.primary_bits)
                             : build_redundant_sets(identity);
    if (code < 0 || code >= (std::int64_t{1} << identity.primary_bits))
        throw ValidationError("map_and_shift: code out of range");
    // (weight desc, primary set first, MSB first)
    std::vector<int> order(static_cast<std::size_t>(nominal.component_count()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto wa = nominal.nominal()[static_cast<std::size_t>(a)];
        const auto wb = nominal.nominal()[static_cast<std::size_t>(b)];
        if (wa != wb) return wa > wb;
        if (nominal.set_of(a) != nominal.set_of(b))
            return nominal.set_of(a) < nominal.set_of(b);
        return a > b;
    });
    Assembly asmbl;
    std::int64_t rem = code;
    for (const int c : order) {
        const auto wc = nominal.nominal()[static_cast<std::size_t>(c)];
        if (wc <= rem) {
            rem -= wc;
            asmbl.selector |= std::uint64_t{1} << c;
        }
    }
    if (rem != 0)
        throw ValidationError("map_and_shift: greedy could not realize code for " +
                              identity.to_string());
    return asmbl;
}

double residual_error(const Assembly& phase1, const MismatchEstimate& est,
                      double v_co) {
    double sum = 0.0;
    for (int c = 0; c < est.component_count(); ++c)
        if (phase1.contains(c)) sum += est.eps(c);
    return sum - v_co;
}

CalibratedAssembly compensate_residual(const Assembly& phase1, double eps_res,
                                       const GeometricIdentity& identity) {
    if (!identity.is_half_split())
        throw ValidationError("compensate_residual: identity is not half-split");
    const int n = identity.primary_bits;
    CalibratedAssembly out;
    out.phase1 = phase1;
    out.residual = eps_res;

    std::int64_t target = std::llround(std::fabs(eps_res));
    if (target == 0) return out;
    if (target > 63) {
        out.saturated = true;
        target = 63;
    }
    const int pool_top = std::min(5, n - 2); // c_{1,0} .. c_{1,5}
    if (eps_res < 0.0) {
        // Reference too low: add idle pool components, binary decomposition.
        for (int j = pool_top; j >= 0; --j) {
            const int g = n + j;
            const std::int64_t wj = std::int64_t{1} << j;
            if (!phase1.contains(g) && wj <= target) {
                out.compensation_added.selector |= std::uint64_t{1} << g;
                target -= wj;
            }
        }
        if (target != 0) out.saturated = true; // pool busy near top codes
    } else {
        // Reference too high: release selected pool components; whatever is
        // left is compensated on the opposing differential branch.
        for (int j = pool_top; j >= 0; --j) {
            const int g = n + j;
            const std::int64_t wj = std::int64_t{1} << j;
            if (phase1.contains(g) && wj <= target) {
                out.compensation_removed.selector |= std::uint64_t{1} << g;
                target -= wj;
            }
        }
        if (target != 0) {
            out.diff_branch_lsb = static_cast<double>(target);
            out.fallback = true;
        }
    }
    return out;
}

CalibratedAssembly calibrated_assembly(std::int64_t code,
                                       const MismatchEstimate& est) {
    const GeometricIdentity id{est.resolution_bits,
                               {{est.resolution_bits - 1, 1}}};
    const Assembly phase1 = map_and_shift(code, id);
    const double res = residual_error(phase1, est, est.v_co_estimate);
    CalibratedAssembly ca = compensate_residual(phase1, res, id);

    // Predict what is still left after the pool compensation, counting the
    // nominal shift it introduced and the stored mismatch of the pool
    // components it touched, and trim it with the sub-DAC.
    double pred = residual_error(ca.effective(), est, est.v_co_estimate) -
                  ca.diff_branch_lsb;
    const int n = est.resolution_bits;
    for (int j = 0; j <= std::min(5, n - 2); ++j) {
        const int g = n + j;
        const double wj = static_cast<double>(std::int64_t{1} << j);
        if (ca.compensation_added.contains(g)) pred += wj;
        if (ca.compensation_removed.contains(g)) pred -= wj;
    }
    ca.sub_dac_trim =
        std::clamp(static_cast<double>(std::llround(pred * 16.0)) / 16.0, -1.0, 1.0);
    return ca;
}

ReferenceSet calibrated_reference_set(const ComponentRealization& real,
                                      const MismatchEstimate& est) {
    const std::int64_t codes = std::int64_t{1} << est.resolution_bits;
    std::vector<double> t(static_cast<std::size_t>(codes) + 1);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 1; i < codes; ++i) {
        const CalibratedAssembly ca = calibrated_assembly(i, est);
        t[static_cast<std::size_t>(i)] =
            reference_of(ca.effective(), real) - ca.diff_branch_lsb - ca.sub_dac_trim;
    }
    t[0] = 0.0; // the code-0 region starts at the range bottom
    t[static_cast<std::size_t>(codes)] = static_cast<double>(codes);
    return ReferenceSet(est.resolution_bits, std::move(t));
}

std::string MismatchEstimate::to_json() const {
    nlohmann::json j;
    j["schema"] = "mismatch-estimate/1";
    j["resolution_bits"] = resolution_bits;
    j["format"] = {{"total_bits", 10}, {"fraction_bits", FixedPoint10::kFracBits}};
    j["fixed_point"] = fixed_point;
    j["eps_raw"] = eps_raw;
    if (!fixed_point) j["eps_exact"] = eps_exact;
    j["v_co_estimate"] = v_co_estimate;
    j["saturation_events"] = saturation_events;
    return j.dump(2);
}

MismatchEstimate MismatchEstimate::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MismatchEstimate est;
    est.resolution_bits = j.at("resolution_bits").get<int>();
    est.fixed_point = j.at("fixed_point").get<bool>();
    est.eps_raw = j.at("eps_raw").get<std::vector<std::int16_t>>();
    if (j.contains("eps_exact"))
        est.eps_exact = j.at("eps_exact").get<std::vector<double>>();
    est.v_co_estimate = j.at("v_co_estimate").get<double>();
    est.saturation_events = j.value("saturation_events", std::int64_t{0});
    if (est.eps_raw.size() != static_cast<std::size_t>(est.component_count()))
        throw ValidationError("mismatch-estimate JSON: table length mismatch");
    return est;
}

} // namespace rsq
