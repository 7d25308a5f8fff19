#include "rsq/assembly_search.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rsq/errors.hpp"

namespace rsq {

namespace {

constexpr int kMaxSearchComponents = 30;

struct HalfEntry {
    double sum;
    std::uint64_t mask;
};

// Subset sums of components [first, first+count) in normalized LSB units,
// sorted by sum, duplicates reduced to the smallest mask.
std::vector<HalfEntry> enumerate_half(const ComponentRealization& real,
                                      int first, int count, double norm) {
    std::vector<HalfEntry> out(std::size_t{1} << count);
    out[0] = {0.0, 0};
    for (std::uint64_t m = 1; m < out.size(); ++m) {
        const int bit = std::countr_zero(m);
        out[m].sum = out[m & (m - 1)].sum +
                     real.actual()[static_cast<std::size_t>(first + bit)] / norm;
        out[m].mask = m;
    }
    std::sort(out.begin(), out.end(), [](const HalfEntry& a, const HalfEntry& b) {
        return a.sum != b.sum ? a.sum < b.sum : a.mask < b.mask;
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const HalfEntry& a, const HalfEntry& b) {
                              return a.sum == b.sum;
                          }),
              out.end());
    return out;
}

struct Searcher {
    std::vector<HalfEntry> low;  // bits [0, split)
    std::vector<HalfEntry> high; // bits [split, total), masks unshifted
    int split;

    explicit Searcher(const ComponentRealization& real) {
        const int total = real.component_count();
        if (total > kMaxSearchComponents)
            throw CapacityError("optimal assembly search: more than 30 components");
        split = total / 2;
        const double norm = real.normalization();
        low = enumerate_half(real, 0, split, norm);
        high = enumerate_half(real, split, total - split, norm);
    }

    // Best (error, selector) for one code; selector ties resolved to the
    // smallest value over the full power set.
    std::pair<double, std::uint64_t> query(std::int64_t code,
                                           std::uint64_t* nodes) const {
        const double target = static_cast<double>(code);
        double best_err = std::numeric_limits<double>::infinity();
        std::uint64_t best_sel = 0;
        std::uint64_t visited = 0;
        for (const HalfEntry& h : high) {
            const double rem = target - h.sum;
            auto it = std::lower_bound(
                low.begin(), low.end(), rem,
                [](const HalfEntry& e, double v) { return e.sum < v; });
            for (auto cand : {it, it == low.begin() ? low.end() : std::prev(it)}) {
                if (cand == low.end()) continue;
                ++visited;
                const double err = std::fabs(cand->sum + h.sum - target);
                const std::uint64_t sel = cand->mask | (h.mask << split);
                if (err < best_err || (err == best_err && sel < best_sel)) {
                    best_err = err;
                    best_sel = sel;
                }
            }
        }
        if (nodes) *nodes += visited;
        return {best_err, best_sel};
    }
};

} // namespace

Assembly optimal_assembly(std::int64_t code, const ComponentRealization& real) {
    Searcher s(real);
    return Assembly{s.query(code, nullptr).second};
}

OptimalReferenceResult optimal_reference_set(const ComponentRealization& real,
                                             bool parallel) {
    const auto t0 = std::chrono::steady_clock::now();
    Searcher s(real);
    const std::int64_t codes = std::int64_t{1} << real.identity().primary_bits;
    OptimalReferenceResult res;
    res.assemblies.resize(static_cast<std::size_t>(codes));
    res.achieved_error.resize(static_cast<std::size_t>(codes));
    std::uint64_t nodes = 0;
#pragma omp parallel for schedule(static) reduction(+ : nodes) if (parallel)
    for (std::int64_t i = 0; i < codes; ++i) {
        auto [err, sel] = s.query(i, &nodes);
        res.assemblies[static_cast<std::size_t>(i)] = Assembly{sel};
        res.achieved_error[static_cast<std::size_t>(i)] = err;
    }
    res.nodes_explored = nodes;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

ReferenceSet optimal_reference_thresholds(const ComponentRealization& real,
                                          bool parallel) {
    const auto res = optimal_reference_set(real, parallel);
    const std::size_t codes = res.assemblies.size();
    std::vector<double> t(codes + 1);
    for (std::size_t i = 0; i < codes; ++i)
        t[i] = reference_of(res.assemblies[i], real);
    t[codes] = static_cast<double>(codes);
    return ReferenceSet(real.identity().primary_bits, std::move(t));
}

} // namespace rsq
