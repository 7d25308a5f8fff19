#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace rsq {

// Storage format of the mismatch table: 10-bit two's complement in
// 1/16-LSB quanta (sign + 5 integer + 4 fractional bits), saturating.
struct FixedPoint10 {
    static constexpr int kFracBits = 4;
    static constexpr double kQuantum = 1.0 / 16.0;
    static constexpr std::int16_t kMinRaw = -512;
    static constexpr std::int16_t kMaxRaw = 511;

    static std::int16_t encode(double value_lsb, bool* saturated = nullptr) {
        const auto q = std::llround(value_lsb * 16.0);
        const bool sat = q < kMinRaw || q > kMaxRaw;
        if (saturated) *saturated = sat;
        return static_cast<std::int16_t>(
            std::clamp<long long>(q, kMinRaw, kMaxRaw));
    }

    static double decode(std::int16_t raw) { return raw * kQuantum; }
};

} // namespace rsq
