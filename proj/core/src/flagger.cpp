#include "sentrisk/flagger.hpp"

#include <cmath>
#include <map>

#include "sentrisk/errors.hpp"
#include "sentrisk/normal.hpp"

namespace sentrisk {

FlagConfig make_flag_config(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie strictly between 0 and 1");
  FlagConfig cfg;
  cfg.alpha = alpha;
  cfg.quantile_z = normal_quantile(1.0 - alpha);
  return cfg;
}

FlagSet flag(const std::vector<double>& f_bar, const std::vector<double>& s_bar,
             const std::vector<double>& y, const FlagConfig& cfg) {
  if (f_bar.size() != s_bar.size() || f_bar.size() != y.size())
    throw DataError("flag: f_bar, s_bar, y must have equal length");
  if (y.empty()) throw DataError("flag: no rows");

  FlagSet out;
  out.alpha = cfg.alpha;
  out.thresholds.reserve(y.size());
  out.labels.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(f_bar[i]) || !std::isfinite(s_bar[i]) || !std::isfinite(y[i]))
      throw NumericError("flag: non-finite value at row " + std::to_string(i));
    if (!(s_bar[i] > 0.0))
      throw NumericError("flag: posterior scale must be positive, got " +
                         std::to_string(s_bar[i]) + " at row " + std::to_string(i));
    const double bound = f_bar[i] + cfg.quantile_z * s_bar[i];
    out.thresholds.push_back(bound);
    out.labels.push_back(y[i] > bound ? 1 : 0);
  }
  return out;
}

BinRateTable flag_rate_by_bin(const FlagSet& flags, const std::vector<std::string>& bin_key) {
  if (bin_key.size() != flags.labels.size())
    throw DataError("flag_rate_by_bin: key and flag lengths differ");
  std::map<std::string, BinRate> acc;
  for (std::size_t i = 0; i < bin_key.size(); ++i) {
    BinRate& row = acc[bin_key[i]];
    row.bin = bin_key[i];
    ++row.count;
    row.flagged += flags.labels[i];
  }
  BinRateTable table;
  table.rows.reserve(acc.size());
  for (auto& [key, row] : acc) {
    row.fraction = static_cast<double>(row.flagged) / static_cast<double>(row.count);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace sentrisk
