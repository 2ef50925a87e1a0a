#pragma once

#include "fracpersist/common.hpp"

#include <string>

namespace fracpersist {

enum class HurstBand { LowerHalf, DegenerateHalf, UpperHalf };

/// Validated Hurst parameter in (0,1), classified relative to the
/// degenerate band |H - 1/2| < half_band where M^H has (near) zero variance.
class Hurst {
public:
    static constexpr double default_half_band = 1e-3;

    explicit Hurst(double value, double half_band = default_half_band);

    double value() const noexcept { return value_; }
    double half_band() const noexcept { return half_band_; }
    HurstBand band() const noexcept { return band_; }
    bool degenerate() const noexcept { return band_ == HurstBand::DegenerateHalf; }

    /// H - 1/2, the exponent offset appearing in every kernel.
    double offset() const noexcept { return value_ - 0.5; }

    operator double() const noexcept { return value_; }

private:
    double value_;
    double half_band_;
    HurstBand band_;
};

std::string to_string(HurstBand band);

}  // namespace fracpersist
