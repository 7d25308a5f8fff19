#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsq/adc.hpp"

namespace rsq {

struct SweepCell {
    int resolution_bits;
    double sigma0;
    ConversionMode mode;
};

struct SweepRow {
    SweepCell cell;
    int trial = 0;
    bool ok = false;
    std::string error; // capacity/validation message when !ok
    double entropy_bits = 0.0;
    double mqr = 0.0;
    double max_abs_dnl = 0.0;
    double max_abs_inl = 0.0;
    std::int64_t wide_codes = 0;
    std::int64_t missing_codes = 0;
};

// One row per (cell, trial); metrics from the realized reference set.
// Deterministic given the seed. `parallel` switches the OpenMP kernel on;
// the serial path is the reference and produces identical rows.
std::vector<SweepRow> monte_carlo_sweep(const std::vector<SweepCell>& cells,
                                        int trials, std::uint64_t seed,
                                        bool parallel = true);

std::string sweep_csv_header();
std::string sweep_row_csv(const SweepRow& row);

// Per-cell quantile summary as a JSON document.
std::string sweep_summary_json(const std::vector<SweepRow>& rows);

// Per-code empirical error statistics across realizations (binary coding):
// mean/variance of P_E(i), the model variance, and wide-code rates.
struct ErrorDistribution {
    int resolution_bits;
    double sigma0;
    int trials;
    std::vector<double> var_pe;        // empirical Var[P_E(i)]
    std::vector<double> mean_abs_pe;   // E|P_E(i)|
    std::vector<double> theory_var;    // first-order model variance
    std::vector<double> mean_pd;       // E[P_D(i)]
    double wide_code_rate = 0.0;       // wide codes per realization
};

ErrorDistribution error_distribution(int resolution_bits, double sigma0,
                                     int trials, std::uint64_t seed,
                                     bool parallel = true);

} // namespace rsq
