#include "fracpersist/hurst.hpp"

#include <cmath>
#include <sstream>

namespace fracpersist {

Hurst::Hurst(double value, double half_band) : value_(value), half_band_(half_band)
{
    if (!(value > 0.0 && value < 1.0)) {
        std::ostringstream os;
        os << "Hurst parameter must lie in (0,1), got " << value;
        throw DomainError(os.str());
    }
    if (!(half_band >= 0.0 && half_band < 0.5)) {
        throw DomainError("degenerate half-band width must lie in [0, 0.5)");
    }
    // Strict inequality: the band edges 1/2 +- half_band are still evaluable.
    // The slack absorbs the rounding in 0.501 - 0.5 < 1e-3.
    if (std::abs(value - 0.5) < half_band * (1.0 - 1e-9) || value == 0.5) {
        band_ = HurstBand::DegenerateHalf;
    } else {
        band_ = value < 0.5 ? HurstBand::LowerHalf : HurstBand::UpperHalf;
    }
}

std::string to_string(HurstBand band)
{
    switch (band) {
    case HurstBand::LowerHalf:
        return "lower";
    case HurstBand::DegenerateHalf:
        return "degenerate";
    case HurstBand::UpperHalf:
        return "upper";
    }
    return "unknown";
}

}  // namespace fracpersist
