#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sentrisk {

struct FlagConfig {
  double alpha = 0.1;     // flag rate target: upper-tail mass
  double quantile_z = 0;  // normal_quantile(1 - alpha), cached
};

// Validates 0 < alpha < 1 and caches the normal quantile.
FlagConfig make_flag_config(double alpha);

struct FlagSet {
  double alpha = 0.1;
  std::vector<double> thresholds;     // f_bar + z * s_bar, per row
  std::vector<std::uint8_t> labels;   // 1 = observed sentence above bound
};

// Flags rows whose observed outcome exceeds the upper (1 - alpha)
// predictive bound f_bar + normal_quantile(1 - alpha) * s_bar. The
// comparison is strict, so a value exactly on the bound is not flagged.
FlagSet flag(const std::vector<double>& f_bar, const std::vector<double>& s_bar,
             const std::vector<double>& y, const FlagConfig& cfg);

struct BinRate {
  std::string bin;
  std::size_t count = 0;
  std::size_t flagged = 0;
  double fraction = 0.0;
};

struct BinRateTable {
  std::vector<BinRate> rows;  // sorted by bin key
};

// Flag rate within each group of `bin_key` (one key string per row), e.g.
// sentencing-guideline cell or district.
BinRateTable flag_rate_by_bin(const FlagSet& flags, const std::vector<std::string>& bin_key);

}  // namespace sentrisk
