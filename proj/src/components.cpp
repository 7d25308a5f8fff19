#include "rsq/components.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rsq/errors.hpp"

namespace rsq {

bool GeometricIdentity::is_half_split() const {
    return extra_sets.size() == 1 && extra_sets[0].bits == primary_bits - 1 &&
           extra_sets[0].scale == 1;
}

std::string GeometricIdentity::to_string() const {
    std::string s = std::to_string(primary_bits);
    for (const auto& e : extra_sets) {
        s += 'x';
        s += std::to_string(e.bits);
        s += 's';
        s += std::to_string(e.scale);
    }
    return s;
}

GeometricIdentity GeometricIdentity::parse(const std::string& text) {
    auto parse_int = [&](std::string_view sv) -> int {
        int v = 0;
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec != std::errc{} || p != sv.data() + sv.size())
            throw ValidationError("bad identity syntax: " + text);
        return v;
    };
    GeometricIdentity id;
    std::string_view rest = text;
    std::size_t pos = rest.find('x');
    id.primary_bits = parse_int(rest.substr(0, pos));
    while (pos != std::string_view::npos) {
        rest = rest.substr(pos + 1);
        pos = rest.find('x');
        std::string_view tok = rest.substr(0, pos);
        std::size_t sp = tok.find('s');
        if (sp == std::string_view::npos)
            throw ValidationError("bad identity syntax (expected NsS): " + text);
        id.extra_sets.push_back(
            {parse_int(tok.substr(0, sp)), parse_int(tok.substr(sp + 1))});
    }
    return id;
}

int ComponentRealization::set_size(int set) const {
    const auto s = static_cast<std::size_t>(set);
    const int end = (s + 1 < set_offset_.size()) ? set_offset_[s + 1]
                                                 : component_count();
    return end - set_offset_[s];
}

int ComponentRealization::global_index(int set, int index_in_set) const {
    return set_offset_[static_cast<std::size_t>(set)] + index_in_set;
}

std::int64_t ComponentRealization::total_nominal() const {
    return std::accumulate(nominal_.begin(), nominal_.end(), std::int64_t{0});
}

double ComponentRealization::total_actual() const {
    return std::accumulate(actual_.begin(), actual_.end(), 0.0);
}

double ComponentRealization::normalization() const {
    const double full = static_cast<double>(
        (std::int64_t{1} << identity_.primary_bits) - 1);
    return total_actual() / full;
}

namespace {

void validate_identity(const GeometricIdentity& id) {
    if (id.primary_bits < 1 || id.primary_bits > 24)
        throw ValidationError("identity: N0 must be in [1, 24]");
    for (const auto& e : id.extra_sets) {
        if (e.bits < 1 || e.bits > id.primary_bits - 1)
            throw ValidationError("identity " + id.to_string() +
                                  ": need 1 <= N_k <= N0-1");
        if (e.scale < 1 || e.scale > id.primary_bits - e.bits)
            throw ValidationError("identity " + id.to_string() +
                                  ": need 1 <= s_k <= N0-N_k");
    }
}

} // namespace

ComponentRealization build_binary_set(int resolution_bits) {
    GeometricIdentity id{resolution_bits, {}};
    validate_identity(id);
    ComponentRealization r;
    r.identity_ = id;
    r.set_offset_ = {0};
    for (int i = 0; i < resolution_bits; ++i) {
        r.nominal_.push_back(std::int64_t{1} << i);
        r.set_of_.push_back(0);
    }
    r.actual_.assign(r.nominal_.begin(), r.nominal_.end());
    return r;
}

ComponentRealization build_redundant_sets(const GeometricIdentity& identity) {
    validate_identity(identity);
    const int n0 = identity.primary_bits;
    std::vector<std::int64_t> primary(static_cast<std::size_t>(n0));
    for (int i = 0; i < n0; ++i) primary[static_cast<std::size_t>(i)] = std::int64_t{1} << i;

    // Each extra set is carved out of the then-current primary set:
    // c_{k,i} = 2^(N0-Nk+i-sk), subtracted at primary position i+N0-Nk.
    std::vector<std::vector<std::int64_t>> extras;
    std::vector<std::vector<int>> parents;
    for (const auto& e : identity.extra_sets) {
        std::vector<std::int64_t> w(static_cast<std::size_t>(e.bits));
        std::vector<int> par(static_cast<std::size_t>(e.bits));
        for (int i = 0; i < e.bits; ++i) {
            const std::int64_t c = std::int64_t{1} << (n0 - e.bits + i - e.scale);
            const int p = i + n0 - e.bits;
            if (primary[static_cast<std::size_t>(p)] <= c)
                throw ValidationError("identity " + identity.to_string() +
                                      ": carve leaves non-positive primary weight");
            primary[static_cast<std::size_t>(p)] -= c;
            w[static_cast<std::size_t>(i)] = c;
            par[static_cast<std::size_t>(i)] = p;
        }
        extras.push_back(std::move(w));
        parents.push_back(std::move(par));
    }

    ComponentRealization r;
    r.identity_ = identity;
    r.set_offset_ = {0};
    for (int i = 0; i < n0; ++i) {
        r.nominal_.push_back(primary[static_cast<std::size_t>(i)]);
        r.set_of_.push_back(0);
    }
    for (std::size_t k = 0; k < extras.size(); ++k) {
        r.set_offset_.push_back(static_cast<int>(r.nominal_.size()));
        for (std::size_t i = 0; i < extras[k].size(); ++i) {
            r.nominal_.push_back(extras[k][i]);
            r.set_of_.push_back(static_cast<int>(k) + 1);
            r.carve_parent_.push_back(parents[k][i]);
        }
    }
    if (r.component_count() > ComponentRealization::kMaxComponents)
        throw CapacityError("identity exceeds component budget");
    r.actual_.assign(r.nominal_.begin(), r.nominal_.end());
    return r;
}

ComponentRealization sample_realization(const ComponentRealization& nominal,
                                        double sigma0, rng::Stream stream) {
    if (sigma0 < 0.0) throw ValidationError("sigma0 must be non-negative");
    ComponentRealization r = nominal;
    r.sigma0_ = sigma0;
    r.seed_ = stream.key();
    r.sampled_ = true;
    r.resample_events_ = 0;
    for (int c = 0; c < r.component_count(); ++c) {
        const auto w = static_cast<double>(r.nominal_[static_cast<std::size_t>(c)]);
        const double sd = std::sqrt(w) * sigma0;
        const auto sub = stream.fork(static_cast<std::uint64_t>(c));
        std::uint64_t draw = 0;
        double a = sub.normal(draw, w, sd);
        while (a <= 0.0) {
            ++r.resample_events_;
            a = sub.normal(++draw, w, sd);
        }
        r.actual_[static_cast<std::size_t>(c)] = a;
    }
    return r;
}

ComponentRealization merge_to_binary(const ComponentRealization& real) {
    const int n0 = real.identity_.primary_bits;
    ComponentRealization r = build_binary_set(n0);
    std::vector<double> actual(static_cast<std::size_t>(n0), 0.0);
    for (int i = 0; i < n0; ++i)
        actual[static_cast<std::size_t>(i)] = real.actual_[static_cast<std::size_t>(i)];
    const int first_extra = real.set_size(0);
    for (std::size_t e = 0; e < real.carve_parent_.size(); ++e)
        actual[static_cast<std::size_t>(real.carve_parent_[e])] +=
            real.actual_[static_cast<std::size_t>(first_extra) + e];
    r.actual_ = std::move(actual);
    r.sigma0_ = real.sigma0_;
    r.seed_ = real.seed_;
    r.sampled_ = real.sampled_;
    return r;
}

double reference_of(const Assembly& assembly, const ComponentRealization& real) {
    const int n = real.component_count();
    double sum = 0.0;
    for (int c = 0; c < n; ++c)
        if (assembly.contains(c)) sum += real.actual()[static_cast<std::size_t>(c)];
    const double total = real.total_actual();
    const double full = static_cast<double>(
        (std::int64_t{1} << real.identity().primary_bits) - 1);
    return sum / total * full;
}

std::vector<std::uint64_t> assembly_count_profile(const GeometricIdentity& identity) {
    ComponentRealization r = build_redundant_sets(identity);
    if (r.component_count() > 26)
        throw CapacityError("assembly_count_profile: more than 26 components");
    const std::size_t codes = std::size_t{1} << identity.primary_bits;
    std::vector<std::uint64_t> counts(codes, 0);
    counts[0] = 1;
    for (const std::int64_t w : r.nominal())
        for (std::size_t s = codes - 1; s >= static_cast<std::size_t>(w); --s)
            counts[s] += counts[s - static_cast<std::size_t>(w)];
    return counts;
}

double theoretical_error_variance(std::int64_t code, int resolution_bits,
                                  double sigma0) {
    const double full = static_cast<double>((std::int64_t{1} << resolution_bits) - 1);
    const double ratio = static_cast<double>(code) / full;
    double var = 0.0;
    for (int j = 0; j < resolution_bits; ++j) {
        const double dj = static_cast<double>((code >> j) & 1);
        var += std::ldexp(std::fabs(dj - ratio), j - 1) * sigma0 * sigma0;
    }
    return var;
}

ReferenceSet binary_reference_set(const ComponentRealization& real) {
    if (!real.identity().is_binary())
        throw ValidationError("binary_reference_set: realization is not single-set");
    const int n = real.identity().primary_bits;
    const std::size_t codes = std::size_t{1} << n;
    std::vector<double> sums(codes);
    sums[0] = 0.0;
    for (std::size_t i = 1; i < codes; ++i) {
        const int bit = std::countr_zero(i);
        sums[i] = sums[i & (i - 1)] + real.actual()[static_cast<std::size_t>(bit)];
    }
    // Normalize against the identically-accumulated full sum so the top
    // reference lands on 2^N - 1 without roundoff.
    const double total = sums[codes - 1];
    const double full = static_cast<double>(codes - 1);
    std::vector<double> t(codes + 1);
    for (std::size_t i = 0; i < codes; ++i) t[i] = sums[i] / total * full;
    t[codes] = static_cast<double>(codes);
    return ReferenceSet(n, std::move(t));
}

std::string ComponentRealization::to_json() const {
    nlohmann::json j;
    j["schema"] = "component-realization/1";
    j["identity"] = identity_.to_string();
    j["nominal"] = nominal_;
    j["actual"] = actual_;
    j["sigma0"] = sigma0_;
    j["seed"] = seed_;
    j["sampled"] = sampled_;
    return j.dump(2);
}

ComponentRealization ComponentRealization::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const auto id = GeometricIdentity::parse(j.at("identity").get<std::string>());
    ComponentRealization r =
        id.is_binary() ? build_binary_set(id.primary_bits) : build_redundant_sets(id);
    const auto nominal = j.at("nominal").get<std::vector<std::int64_t>>();
    if (nominal != r.nominal_)
        throw ValidationError("realization JSON: nominal weights do not match identity");
    r.actual_ = j.at("actual").get<std::vector<double>>();
    if (r.actual_.size() != r.nominal_.size())
        throw ValidationError("realization JSON: actual length mismatch");
    for (double a : r.actual_)
        if (!(a > 0.0)) throw ValidationError("realization JSON: non-positive weight");
    r.sigma0_ = j.at("sigma0").get<double>();
    r.seed_ = j.at("seed").get<std::uint64_t>();
    r.sampled_ = j.value("sampled", true);
    return r;
}

} // namespace rsq
