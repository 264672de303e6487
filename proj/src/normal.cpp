#include "glht/normal.hpp"

#include <cmath>
#include <numbers>

#include "glht/error.hpp"

namespace glht {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_upper_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorKind::InvalidInput, "level must lie strictly between 0 and 1");
    }
    // normal_sf is decreasing; [-40, 40] brackets every representable level.
    double lo = -40.0, hi = 40.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (normal_sf(mid) > level) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace glht
