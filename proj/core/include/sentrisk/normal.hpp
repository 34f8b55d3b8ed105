#pragma once

namespace sentrisk {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile (inverse CDF). Accurate to ~1e-15 over (0,1)
// via Wichura's rational approximation; p outside (0,1) throws.
double normal_quantile(double p);

}  // namespace sentrisk
