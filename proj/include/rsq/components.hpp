#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsq/reference_set.hpp"
#include "rsq/rng.hpp"

namespace rsq {

// Design descriptor N0·(N1,s1)·(N2,s2)... : primary resolution plus the
// ordered extra sets carved out of it.
struct SetSpec {
    int bits;  // N_k
    int scale; // s_k

    bool operator==(const SetSpec&) const = default;
};

struct GeometricIdentity {
    int primary_bits = 0;            // N0
    std::vector<SetSpec> extra_sets; // empty for pure binary

    int set_count() const { return 1 + static_cast<int>(extra_sets.size()); }
    bool is_binary() const { return extra_sets.empty(); }
    // The N1 = N0-1, s1 = 1 two-set special case.
    bool is_half_split() const;
    std::string to_string() const; // e.g. "14x13s1"
    static GeometricIdentity parse(const std::string& text);
    bool operator==(const GeometricIdentity&) const = default;
};

// Subset of components, one bit per component in global order
// (set 0 ascending, then set 1 ascending, ...).
struct Assembly {
    std::uint64_t selector = 0;

    bool contains(int global_index) const {
        return (selector >> global_index) & 1u;
    }
    bool operator==(const Assembly&) const = default;
};

// Nominal and (optionally) sampled actual weights of every component.
class ComponentRealization {
public:
    static constexpr int kMaxComponents = 62;

    const GeometricIdentity& identity() const { return identity_; }
    int component_count() const { return static_cast<int>(nominal_.size()); }
    int set_size(int set) const;
    int global_index(int set, int index_in_set) const;
    int set_of(int global_index) const { return set_of_[static_cast<std::size_t>(global_index)]; }

    const std::vector<std::int64_t>& nominal() const { return nominal_; }
    const std::vector<double>& actual() const { return actual_; }
    std::int64_t nominal_of(int set, int index_in_set) const {
        return nominal_[static_cast<std::size_t>(global_index(set, index_in_set))];
    }
    double actual_of(int set, int index_in_set) const {
        return actual_[static_cast<std::size_t>(global_index(set, index_in_set))];
    }

    double sigma0() const { return sigma0_; }
    std::uint64_t seed() const { return seed_; }
    bool has_samples() const { return sampled_; }
    std::int64_t resample_events() const { return resample_events_; }

    std::int64_t total_nominal() const;
    double total_actual() const;

    // Normalization constant of generated references: sum(actual)/(2^N0 - 1).
    double normalization() const;

    std::string to_json() const;
    static ComponentRealization from_json(const std::string& text);

    friend ComponentRealization build_binary_set(int resolution_bits);
    friend ComponentRealization build_redundant_sets(const GeometricIdentity& identity);
    friend ComponentRealization sample_realization(const ComponentRealization& nominal,
                                                   double sigma0, rng::Stream stream);
    friend ComponentRealization merge_to_binary(const ComponentRealization& real);

private:
    GeometricIdentity identity_;
    std::vector<std::int64_t> nominal_; // flat, global order
    std::vector<double> actual_;        // == nominal when not sampled
    std::vector<int> set_offset_;       // start of each set in the flat vectors
    std::vector<int> set_of_;           // global index -> set
    // For each extra-set component: the primary position it was carved from.
    std::vector<int> carve_parent_;
    double sigma0_ = 0.0;
    std::uint64_t seed_ = 0;
    bool sampled_ = false;
    std::int64_t resample_events_ = 0;
};

// Conventional binary-weighted set {1, 2, ..., 2^(N-1)}, nominal only.
ComponentRealization build_binary_set(int resolution_bits);

// Nominal two-set (or n-set) construction; throws on invalid identities.
ComponentRealization build_redundant_sets(const GeometricIdentity& identity);

// Each component of nominal weight w draws actual ~ Normal(w, w*sigma0^2),
// the sum of w i.i.d. unit cells. Non-positive draws are redrawn.
ComponentRealization sample_realization(const ComponentRealization& nominal,
                                        double sigma0, rng::Stream stream);

// Collapse a redundant realization back to the binary set it was carved
// from, preserving the sampled unit cells (actual weights add).
ComponentRealization merge_to_binary(const ComponentRealization& real);

// Normalized reference generated by an assembly: empty -> 0, full -> 2^N0-1.
double reference_of(const Assembly& assembly, const ComponentRealization& real);

// Number of assemblies realizing each nominal code, by counting DP.
std::vector<std::uint64_t> assembly_count_profile(const GeometricIdentity& identity);

// First-order model variance of P_E(i) for a binary-coded N-bit quantizer.
double theoretical_error_variance(std::int64_t code, int resolution_bits, double sigma0);

// All 2^N thresholds of a single-set (binary) realization where code i uses
// its nominal binary assembly; includes the dummy top reference.
ReferenceSet binary_reference_set(const ComponentRealization& real);

} // namespace rsq
