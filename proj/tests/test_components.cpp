#include <doctest.h>

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rsq/components.hpp"
#include "rsq/errors.hpp"

using namespace rsq;

TEST_CASE("binary set weights") {
    const auto b4 = build_binary_set(4);
    CHECK(b4.nominal() == std::vector<std::int64_t>{1, 2, 4, 8});
    CHECK(b4.total_nominal() == 15);
    CHECK(build_binary_set(1).nominal() == std::vector<std::int64_t>{1});
    CHECK(build_binary_set(14).total_nominal() == (1 << 14) - 1);
    CHECK_THROWS_AS(build_binary_set(0), ValidationError);
}

TEST_CASE("identity parsing round trip") {
    const GeometricIdentity half{14, {{13, 1}}};
    CHECK(half.to_string() == "14x13s1");
    CHECK(GeometricIdentity::parse("14x13s1") == half);
    CHECK(half.is_half_split());
    CHECK_FALSE(GeometricIdentity{8, {{1, 1}}}.is_half_split());
    CHECK(GeometricIdentity::parse("8").is_binary());
    const auto nset = GeometricIdentity::parse("8x4s1x2s2");
    CHECK(nset.primary_bits == 8);
    REQUIRE(nset.extra_sets.size() == 2);
    CHECK(nset.extra_sets[1].bits == 2);
    CHECK(nset.extra_sets[1].scale == 2);
    CHECK(GeometricIdentity::parse(nset.to_string()) == nset);
    CHECK_THROWS_AS(GeometricIdentity::parse("junk"), ValidationError);
}

TEST_CASE("half-split construction 14x13s1") {
    const auto real = build_redundant_sets({14, {{13, 1}}});
    REQUIRE(real.component_count() == 27);
    CHECK(real.nominal_of(0, 0) == 1);
    CHECK(real.nominal_of(0, 1) == 1); // carved MSB halves cascade down
    for (int i = 2; i <= 13; ++i) CHECK(real.nominal_of(0, i) == (1ll << (i - 1)));
    for (int i = 0; i <= 12; ++i) CHECK(real.nominal_of(1, i) == (1ll << i));
    CHECK(real.total_nominal() == (1 << 14) - 1);
}

TEST_CASE("two-set construction 8x1s1") {
    const auto real = build_redundant_sets({8, {{1, 1}}});
    const std::vector<std::int64_t> primary{1, 2, 4, 8, 16, 32, 64, 64};
    REQUIRE(real.component_count() == 9);
    for (int i = 0; i < 8; ++i) CHECK(real.nominal_of(0, i) == primary[size_t(i)]);
    CHECK(real.nominal_of(1, 0) == 64);
    CHECK(real.total_nominal() == 255);
}

TEST_CASE("n-set construction 8x4s1x2s2") {
    const auto real = build_redundant_sets(GeometricIdentity::parse("8x4s1x2s2"));
    const std::vector<std::int64_t> expect{1, 2, 4, 8, 8, 16, 16, 32, // primary
                                           8, 16, 32, 64,             // set 1
                                           16, 32};                   // set 2
    CHECK(real.nominal() == expect);
    CHECK(real.total_nominal() == 255);
}

TEST_CASE("conservation across all two-set identities") {
    for (int n0 = 2; n0 <= 16; ++n0)
        for (int n1 = 1; n1 < n0; ++n1)
            for (int s1 = 1; s1 + n1 <= n0; ++s1) {
                const auto real = build_redundant_sets({n0, {{n1, s1}}});
                CHECK(real.total_nominal() == (1ll << n0) - 1);
                for (auto w : real.nominal()) CHECK(w >= 1);
            }
}

TEST_CASE("invalid identities are rejected") {
    CHECK_THROWS_AS(build_redundant_sets({8, {{8, 1}}}), ValidationError);  // N1 >= N0
    CHECK_THROWS_AS(build_redundant_sets({8, {{0, 1}}}), ValidationError);  // N1 < 1
    CHECK_THROWS_AS(build_redundant_sets({8, {{7, 2}}}), ValidationError);  // s1 too big
    CHECK_THROWS_AS(build_redundant_sets({8, {{1, 0}}}), ValidationError);  // s1 < 1
}

TEST_CASE("sampling is deterministic and unbiased at sigma0 = 0") {
    const auto nominal = build_redundant_sets({10, {{9, 1}}});
    const auto exact = sample_realization(nominal, 0.0, rng::Stream(5));
    for (int g = 0; g < exact.component_count(); ++g)
        CHECK(exact.actual()[size_t(g)] == double(exact.nominal()[size_t(g)]));

    const auto a = sample_realization(nominal, 0.05, rng::Stream(42));
    const auto b = sample_realization(nominal, 0.05, rng::Stream(42));
    const auto c = sample_realization(nominal, 0.05, rng::Stream(43));
    CHECK(a.actual() == b.actual());
    CHECK(a.actual() != c.actual());
    CHECK(a.has_samples());
}

TEST_CASE("sampled spread matches the unit-cell model") {
    // weight 1024 at sigma0 = 0.1: std = sqrt(1024) * 0.1 = 3.2
    const auto nominal = build_binary_set(11);
    const int trials = 100000;
    double sum = 0.0, sumsq = 0.0;
    rng::Stream root(777);
    for (int t = 0; t < trials; ++t) {
        const auto real = sample_realization(nominal, 0.1, root.fork(std::uint64_t(t)));
        const double w = real.actual()[10];
        sum += w;
        sumsq += w * w;
    }
    const double mean = sum / trials;
    const double std = std::sqrt(sumsq / trials - mean * mean);
    CHECK(std::abs(mean - 1024.0) < 0.05);
    CHECK(std::abs(std - 3.2) / 3.2 < 0.03);
}

TEST_CASE("reference_of endpoints") {
    const auto nominal = build_redundant_sets({8, {{7, 1}}});
    const auto real = sample_realization(nominal, 0.1, rng::Stream(3));
    CHECK(reference_of(Assembly{0}, real) == 0.0);
    const Assembly full{(std::uint64_t(1) << real.component_count()) - 1};
    CHECK(reference_of(full, real) == doctest::Approx(255.0).epsilon(1e-15));
    // sigma0 = 0: any assembly lands on its nominal sum
    const Assembly some{0b101101};
    double want = 0.0;
    for (int g = 0; g < nominal.component_count(); ++g)
        if (some.contains(g)) want += double(nominal.nominal()[size_t(g)]);
    CHECK(reference_of(some, nominal) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("merge_to_binary preserves unit cells") {
    const auto hs = sample_realization(build_redundant_sets({10, {{9, 1}}}), 0.08,
                                       rng::Stream(11));
    const auto bin = merge_to_binary(hs);
    REQUIRE(bin.component_count() == 10);
    CHECK(bin.identity().is_binary());
    CHECK(bin.actual()[0] == doctest::Approx(hs.actual_of(0, 0)).epsilon(1e-15));
    for (int i = 1; i < 10; ++i)
        CHECK(bin.actual()[size_t(i)] ==
              doctest::Approx(hs.actual_of(0, i) + hs.actual_of(1, i - 1)).epsilon(1e-15));
    CHECK(bin.total_actual() == doctest::Approx(hs.total_actual()).epsilon(1e-15));
}

TEST_CASE("assembly count profile") {
    const auto counts = assembly_count_profile({8, {{7, 1}}});
    REQUIRE(counts.size() == 256);
    CHECK(counts[0] == 1);
    CHECK(counts[255] == 1);
    std::uint64_t total = 0;
    for (auto c : counts) {
        CHECK(c >= 1); // completeness: every code reachable
        total += c;
    }
    CHECK(total == (std::uint64_t(1) << 15)); // 2^(N0+N1) subsets
    // symmetric construction, symmetric histogram
    for (int i = 0; i < 128; ++i) CHECK(counts[size_t(i)] == counts[size_t(255 - i)]);
    CHECK_THROWS_AS(assembly_count_profile({14, {{13, 1}}}), CapacityError);
}

TEST_CASE("completeness of every two-set identity up to 10 bits") {
    for (int n0 = 2; n0 <= 10; ++n0)
        for (int n1 = 1; n1 < n0; ++n1)
            for (int s1 = 1; s1 + n1 <= n0; ++s1) {
                const auto counts = assembly_count_profile({n0, {{n1, s1}}});
                for (auto c : counts) CHECK(c >= 1);
            }
}

TEST_CASE("redundancy spread grows with s1") {
    // variance of the count-weighted code distribution, N0 = 8
    auto spread = [](const std::vector<std::uint64_t>& counts) {
        double tot = 0.0, mean = 0.0;
        for (size_t i = 0; i < counts.size(); ++i) {
            tot += double(counts[i]);
            mean += double(counts[i]) * double(i);
        }
        mean /= tot;
        double var = 0.0;
        for (size_t i = 0; i < counts.size(); ++i)
            var += double(counts[i]) * (double(i) - mean) * (double(i) - mean);
        return var / tot;
    };
    for (int n1 = 1; n1 <= 7; ++n1) {
        double prev = -1.0;
        for (int s1 = 1; s1 + n1 <= 8; ++s1) {
            const double v = spread(assembly_count_profile({8, {{n1, s1}}}));
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
}

TEST_CASE("theoretical error variance endpoints and scale") {
    CHECK(theoretical_error_variance(0, 14, 0.1) == doctest::Approx(0.0));
    CHECK(theoretical_error_variance((1 << 14) - 1, 14, 0.1) == doctest::Approx(0.0));
    // quadruples with sigma0 doubling
    const double v1 = theoretical_error_variance(5000, 14, 0.05);
    const double v2 = theoretical_error_variance(5000, 14, 0.10);
    CHECK(v2 == doctest::Approx(4.0 * v1).epsilon(1e-12));
    CHECK(v1 > 0.0);
}

TEST_CASE("json round trip") {
    const auto real = sample_realization(build_redundant_sets({8, {{7, 1}}}), 0.1,
                                         rng::Stream(21));
    const auto back = ComponentRealization::from_json(real.to_json());
    CHECK(back.identity() == real.identity());
    CHECK(back.nominal() == real.nominal());
    CHECK(back.actual() == real.actual());
    CHECK(back.sigma0() == real.sigma0());
    CHECK(back.seed() == real.seed());
    CHECK(back.has_samples() == real.has_samples());
}

TEST_CASE("references scale with the actual weights") {
    const auto real = sample_realization(build_redundant_sets({8, {{7, 1}}}), 0.1,
                                         rng::Stream(31));
    auto doc = nlohmann::json::parse(real.to_json());
    for (auto& v : doc["actual"]) v = v.get<double>() * 3.0;
    const auto scaled = ComponentRealization::from_json(doc.dump());
    for (std::uint64_t sel : {0ull, 0b1011ull, 0x5a5aull, 0x7fffull}) {
        const Assembly a{sel};
        CHECK(reference_of(a, scaled) ==
              doctest::Approx(reference_of(a, real)).epsilon(1e-12));
    }
}
