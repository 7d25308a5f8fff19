// Timing comparison of the serial reference paths against the OpenMP
// kernels, with result equality checked on each pair.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rsq/assembly_search.hpp"
#include "rsq/sweep.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool equal) {
    std::printf("%-28s serial %8.3fs  openmp %8.3fs  speedup %5.2fx  %s\n", name,
                serial, parallel, serial / parallel,
                equal ? "results equal" : "RESULTS DIFFER");
}

void bench_sweep(std::uint64_t seed) {
    const std::vector<rsq::SweepCell> cells{
        {12, 0.10, rsq::ConversionMode::binary},
        {12, 0.03, rsq::ConversionMode::heuristic_calibrated}};
    auto t0 = Clock::now();
    const auto serial_rows = rsq::monte_carlo_sweep(cells, 100, seed, false);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto parallel_rows = rsq::monte_carlo_sweep(cells, 100, seed, true);
    const double tp = seconds_since(t0);
    bool equal = serial_rows.size() == parallel_rows.size();
    for (std::size_t i = 0; equal && i < serial_rows.size(); ++i)
        equal = rsq::sweep_row_csv(serial_rows[i]) == rsq::sweep_row_csv(parallel_rows[i]);
    report("monte_carlo_sweep", ts, tp, equal);
}

void bench_error_distribution(std::uint64_t seed) {
    auto t0 = Clock::now();
    const auto serial = rsq::error_distribution(14, 0.10, 512, seed, false);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto parallel = rsq::error_distribution(14, 0.10, 512, seed, true);
    const double tp = seconds_since(t0);
    report("error_distribution", ts, tp, serial.var_pe == parallel.var_pe);
}

void bench_optimal_search(std::uint64_t seed) {
    const rsq::GeometricIdentity id{11, {{10, 1}}};
    const auto real = rsq::sample_realization(rsq::build_redundant_sets(id), 0.10,
                                              rsq::rng::Stream(seed));
    auto t0 = Clock::now();
    const auto serial = rsq::optimal_reference_set(real, false);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto parallel = rsq::optimal_reference_set(real, true);
    const double tp = seconds_since(t0);
    bool equal = serial.achieved_error == parallel.achieved_error;
    for (std::size_t i = 0; equal && i < serial.assemblies.size(); ++i)
        equal = serial.assemblies[i] == parallel.assemblies[i];
    report("optimal_reference_set", ts, tp, equal);
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = 42;
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp; both paths run serially\n");
#endif
    bench_sweep(seed);
    bench_error_distribution(seed);
    bench_optimal_search(seed);
    return 0;
}
