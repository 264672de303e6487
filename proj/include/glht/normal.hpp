#pragma once

namespace glht {

/// Upper tail 1 - Phi(z) of the standard normal.
double normal_sf(double z);

/// Phi(z).
double normal_cdf(double z);

/// z with normal_sf(z) == level, found by bisection to 1e-12.
double normal_upper_quantile(double level);

}  // namespace glht
