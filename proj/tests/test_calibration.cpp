#include <doctest.h>

#include <cmath>

#include "rsq/calibration.hpp"
#include "rsq/errors.hpp"

using namespace rsq;

namespace {

HalfSplitArray make_array(int n, double sigma0, std::uint64_t seed,
                          MeasurementMode mode) {
    HalfSplitArray arr;
    arr.realization = sample_realization(build_redundant_sets({n, {{n - 1, 1}}}),
                                         sigma0, rng::Stream(seed));
    arr.mode = mode;
    return arr;
}

} // namespace

TEST_CASE("fixed point storage") {
    for (int raw = -512; raw <= 511; ++raw)
        CHECK(FixedPoint10::encode(FixedPoint10::decode(std::int16_t(raw))) == raw);
    CHECK(FixedPoint10::decode(FixedPoint10::encode(1.03125)) ==
          doctest::Approx(1.0625)); // rounds to the nearest sixteenth
    bool sat = false;
    CHECK(FixedPoint10::encode(33.0, &sat) == 511);
    CHECK(sat);
    CHECK(FixedPoint10::encode(-40.0, &sat) == -512);
    CHECK(sat);
    CHECK(FixedPoint10::encode(31.9, &sat) == 510);
    CHECK_FALSE(sat);
}

TEST_CASE("true mismatch is zero for a nominal array") {
    const auto eps = true_mismatch(build_redundant_sets({10, {{9, 1}}}));
    for (double e : eps) CHECK(e == doctest::Approx(0.0));
}

TEST_CASE("estimation requires a half-split identity") {
    HalfSplitArray arr;
    arr.realization = build_redundant_sets({8, {{1, 1}}});
    CHECK_THROWS_AS(estimate_mismatch(arr), ValidationError);
}

TEST_CASE("zero mismatch estimates to zero") {
    for (auto mode : {MeasurementMode::ideal, MeasurementMode::behavioral}) {
        auto arr = make_array(10, 0.0, 1, mode);
        const auto est = estimate_mismatch(arr, false);
        for (int c = 0; c < est.component_count(); ++c)
            CHECK(est.eps(c) == doctest::Approx(0.0));
        CHECK(est.saturation_events == 0);
    }
}

TEST_CASE("ideal measurement recovers the true mismatch exactly") {
    for (std::uint64_t seed : {3u, 4u, 5u, 6u, 7u}) {
        const auto arr = make_array(12, 0.03, seed, MeasurementMode::ideal);
        const auto est = estimate_mismatch(arr, false);
        const auto truth = true_mismatch(arr.realization);
        for (int c = 0; c < est.component_count(); ++c)
            CHECK(std::abs(est.eps(c) - truth[size_t(c)]) < 1e-9);
        CHECK(std::abs(est.eps_sum()) < 1e-9);
    }
}

TEST_CASE("fixed-point storage only adds rounding error") {
    const auto arr = make_array(12, 0.03, 9, MeasurementMode::ideal);
    const auto est = estimate_mismatch(arr, true);
    const auto truth = true_mismatch(arr.realization);
    for (int c = 0; c < est.component_count(); ++c)
        CHECK(std::abs(est.eps(c) - truth[size_t(c)]) <=
              FixedPoint10::kQuantum / 2 + 1e-12);
}

TEST_CASE("behavioral measurement stays within an LSB") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto arr = make_array(14, 0.02, seed, MeasurementMode::behavioral);
        const auto est = estimate_mismatch(arr, true);
        const auto truth = true_mismatch(arr.realization);
        for (int c = 0; c < est.component_count(); ++c, ++checked)
            CHECK(std::abs(est.eps(c) - truth[size_t(c)]) <= 1.0);
        // stored table sums to within one quantum per entry
        CHECK(std::abs(est.eps_sum()) <=
              est.component_count() * FixedPoint10::kQuantum);
    }
    CHECK(checked == 20 * 27);
}

TEST_CASE("raw differences land on the sub-DAC grid in behavioral mode") {
    const auto arr = make_array(12, 0.03, 13, MeasurementMode::behavioral);
    const auto est = estimate_mismatch(arr);
    REQUIRE(est.raw_differences.size() == size_t(2 * (12 - 1)));
    for (double d : est.raw_differences) {
        const double q = d * 16.0;
        CHECK(std::abs(q - std::llround(q)) < 1e-9);
    }
}

TEST_CASE("comparator offset is resolved to sub-DAC precision") {
    auto arr = make_array(12, 0.02, 17, MeasurementMode::behavioral);
    arr.comparator_offset = 1.7;
    const auto est = estimate_mismatch(arr);
    CHECK(est.v_co_estimate == doctest::Approx(std::llround(1.7 * 16.0) / 16.0));
    CHECK(std::abs(est.v_co_estimate - 1.7) <= 1.0 / 32.0 + 1e-12);

    auto ideal = arr;
    ideal.mode = MeasurementMode::ideal;
    CHECK(estimate_mismatch(ideal).v_co_estimate == doctest::Approx(1.7));
}

TEST_CASE("divergence guard trips under gross mismatch") {
    int throws = 0;
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        const auto arr = make_array(14, 0.6, seed, MeasurementMode::ideal);
        try {
            (void)estimate_mismatch(arr, false);
        } catch (const EstimationDivergence&) {
            ++throws;
        }
    }
    CHECK(throws >= 1);
}

TEST_CASE("estimate json round trip") {
    const auto arr = make_array(10, 0.03, 23, MeasurementMode::behavioral);
    const auto est = estimate_mismatch(arr);
    const auto back = MismatchEstimate::from_json(est.to_json());
    CHECK(back.resolution_bits == est.resolution_bits);
    CHECK(back.fixed_point == est.fixed_point);
    CHECK(back.eps_raw == est.eps_raw);
    CHECK(back.v_co_estimate == est.v_co_estimate);
    CHECK(back.saturation_events == est.saturation_events);
}

TEST_CASE("map_and_shift frozen examples") {
    const GeometricIdentity id{14, {{13, 1}}};
    CHECK(map_and_shift(0, id).selector == 0);
    // 8192 = c_{0,13} (4096) + c_{1,12} (4096): globals 13 and 26
    const auto a = map_and_shift(8192, id);
    CHECK(a.selector == ((std::uint64_t{1} << 13) | (std::uint64_t{1} << 26)));
    CHECK_THROWS_AS(map_and_shift(-1, id), ValidationError);
    CHECK_THROWS_AS(map_and_shift(1 << 14, id), ValidationError);
}

TEST_CASE("map_and_shift realizes every code exactly") {
    for (int n = 2; n <= 12; ++n) {
        const GeometricIdentity id{n, {{n - 1, 1}}};
        const auto nominal = build_redundant_sets(id);
        for (std::int64_t code = 0; code < (1ll << n); ++code) {
            const auto a = map_and_shift(code, id);
            std::int64_t sum = 0;
            for (int c = 0; c < nominal.component_count(); ++c)
                if (a.contains(c)) sum += nominal.nominal()[size_t(c)];
            CHECK(sum == code);
        }
    }
    // spot checks at full resolution
    const GeometricIdentity id{14, {{13, 1}}};
    const auto nominal = build_redundant_sets(id);
    for (std::int64_t code = 0; code < (1 << 14); code += 97) {
        const auto a = map_and_shift(code, id);
        std::int64_t sum = 0;
        for (int c = 0; c < nominal.component_count(); ++c)
            if (a.contains(c)) sum += nominal.nominal()[size_t(c)];
        CHECK(sum == code);
    }
}

TEST_CASE("map_and_shift keeps the secondary LSB pool idle") {
    // Away from the top codes the greedy allocation never touches
    // c_{1,0}..c_{1,5}, the components compensation draws from.
    const GeometricIdentity id{14, {{13, 1}}};
    for (std::int64_t code = 0; code < 3 * (1 << 12); code += 53) {
        const auto a = map_and_shift(code, id);
        for (int j = 0; j <= 5; ++j) CHECK_FALSE(a.contains(14 + j));
    }
}

TEST_CASE("residual error arithmetic") {
    MismatchEstimate est;
    est.resolution_bits = 3;
    est.fixed_point = false;
    est.eps_exact = {0.1, -0.2, 0.3, 0.0, 0.05};
    est.eps_raw.assign(5, 0);
    CHECK(residual_error(Assembly{0}, est, 0.0) == doctest::Approx(0.0));
    CHECK(residual_error(Assembly{0b00101}, est, 0.0) == doctest::Approx(0.4));
    CHECK(residual_error(Assembly{0b00101}, est, 0.25) == doctest::Approx(0.15));
}

TEST_CASE("compensation adds idle pool components for low references") {
    const GeometricIdentity id{14, {{13, 1}}};
    const auto phase1 = map_and_shift(8192, id);
    const auto ca = compensate_residual(phase1, -5.3, id);
    // |round(-5.3)| = 5 = c_{1,2} + c_{1,0}: globals 16 and 14
    CHECK(ca.compensation_added.selector ==
          ((std::uint64_t{1} << 16) | (std::uint64_t{1} << 14)));
    CHECK(ca.compensation_removed.selector == 0);
    CHECK_FALSE(ca.saturated);
    CHECK_FALSE(ca.fallback);
    CHECK(ca.diff_branch_lsb == 0.0);
    CHECK(ca.effective().contains(13));
    CHECK(ca.effective().contains(16));
}

TEST_CASE("compensation releases selected components for high references") {
    const GeometricIdentity id{14, {{13, 1}}};
    // force pool components into the selection
    Assembly phase1{(std::uint64_t{1} << 13) | (std::uint64_t{1} << 15)}; // c1_1 selected
    const auto ca = compensate_residual(phase1, 2.3, id);
    CHECK(ca.compensation_removed.selector == (std::uint64_t{1} << 15));
    CHECK_FALSE(ca.fallback);
    CHECK_FALSE(ca.effective().contains(15));
}

TEST_CASE("compensation falls back to the opposing branch") {
    const GeometricIdentity id{14, {{13, 1}}};
    const Assembly phase1{std::uint64_t{1} << 13}; // no pool components to drop
    const auto ca = compensate_residual(phase1, 1.2, id);
    CHECK(ca.fallback);
    CHECK(ca.diff_branch_lsb == doctest::Approx(1.0));
    CHECK(ca.compensation_removed.selector == 0);
}

TEST_CASE("compensation saturates past the pool range") {
    const GeometricIdentity id{14, {{13, 1}}};
    const auto ca = compensate_residual(Assembly{0}, -70.0, id);
    CHECK(ca.saturated);
    const auto none = compensate_residual(Assembly{0}, 0.2, id);
    CHECK(none.compensation_added.selector == 0);
    CHECK(none.compensation_removed.selector == 0);
    CHECK_FALSE(none.saturated);
}

TEST_CASE("calibrated assembly is exact at zero mismatch") {
    const auto arr = make_array(10, 0.0, 1, MeasurementMode::ideal);
    const auto est = estimate_mismatch(arr);
    for (std::int64_t code : {0ll, 1ll, 511ll, 512ll, 777ll, 1023ll}) {
        const auto ca = calibrated_assembly(code, est);
        CHECK(ca.effective() == map_and_shift(code, arr.realization.identity()));
        CHECK(ca.residual == doctest::Approx(0.0));
    }
}

TEST_CASE("compensation shrinks the residual on real mismatch") {
    int improved = 0, total = 0;
    for (std::uint64_t seed = 40; seed < 50; ++seed) {
        const auto arr = make_array(12, 0.03, seed, MeasurementMode::ideal);
        const auto est = estimate_mismatch(arr);
        const auto truth = true_mismatch(arr.realization);
        for (std::int64_t code = 1; code < (1 << 12); code += 37, ++total) {
            const auto ca = calibrated_assembly(code, est);
            auto err_of = [&](const Assembly& a, double diff) {
                double ref = 0.0;
                for (int c = 0; c < arr.realization.component_count(); ++c)
                    if (a.contains(c))
                        ref += arr.realization.nominal()[size_t(c)] + truth[size_t(c)];
                return std::abs(ref - diff - double(code));
            };
            const double pre = err_of(ca.phase1, 0.0);
            const double post = err_of(ca.effective(), ca.diff_branch_lsb);
            if (post <= pre + 1e-12) ++improved;
            CHECK(post <= 1.0); // within an LSB after compensation
        }
    }
    // rounding the residual can overshoot slightly when |pre| < 1/2 LSB
    CHECK(double(improved) / double(total) >= 0.95);
}

TEST_CASE("calibrated reference set is pinned and offset-aware") {
    const auto arr = make_array(10, 0.02, 61, MeasurementMode::ideal);
    const auto est = estimate_mismatch(arr);
    const auto refs = calibrated_reference_set(arr.realization, est);
    CHECK(refs.threshold(0) == 0.0);
    CHECK(refs.threshold(1 << 10) == double(1 << 10));
    CHECK(refs.resolution_bits() == 10);
    const auto m = metrics_of(refs);
    CHECK(m.entropy_bits > 9.5);
}
