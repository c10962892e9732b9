#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "transmean/core.hpp"

namespace transmean {

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// 1 - normal_cdf(x), computed without cancellation in the upper tail.
inline double normal_sf(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// z_alpha, the upper alpha-quantile of N(0,1).
inline double normal_upper_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0, 1)");
    }
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * alpha);
}

}  // namespace transmean
