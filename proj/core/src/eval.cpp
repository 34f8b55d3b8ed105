#include "sentrisk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentrisk/errors.hpp"
#include "sentrisk/normal.hpp"

namespace sentrisk {

RocCurve auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size())
    throw DataError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i])) throw NumericError("auc: non-finite score");
    if (labels[i]) ++n1;
  }
  const std::size_t n0 = n - n1;
  if (n1 == 0 || n0 == 0)
    throw NumericError("auc: needs both classes, have " + std::to_string(n1) +
                       " positives of " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  // Sweep thresholds from high to low; each distinct score adds one knot.
  // Doubled area accumulates sum of dFP * (TP_before + TP_after), an exact
  // integer, matching the tie-aware pairwise count.
  std::size_t tp = 0, fp = 0;
  std::uint64_t twice_area = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t dtp = 0, dfp = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++dtp;
      else ++dfp;
      ++j;
    }
    twice_area += static_cast<std::uint64_t>(dfp) * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n0),
                            static_cast<double>(tp) / static_cast<double>(n1)});
    i = j;
  }
  curve.auc = static_cast<double>(twice_area) /
              (2.0 * static_cast<double>(n1) * static_cast<double>(n0));
  return curve;
}

RiskBinTable risk_bins(const std::vector<double>& scores,
                       const std::vector<std::uint8_t>& labels, std::size_t k) {
  if (scores.size() != labels.size())
    throw DataError("risk_bins: scores and labels differ in length");
  if (k < 2) throw ConfigError("risk_bins: need at least 2 bins");
  const std::size_t n = scores.size();
  if (n < k)
    throw DataError("risk_bins: need at least " + std::to_string(k) + " rows, have " +
                    std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  RiskBinTable table;
  table.bins.resize(k);
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t lo = b * n / k;
    const std::size_t hi = (b + 1) * n / k;
    RiskBin& bin = table.bins[b];
    bin.count = hi - lo;
    bin.score_min = scores[order[lo]];
    bin.score_max = scores[order[hi - 1]];
    for (std::size_t p = lo; p < hi; ++p)
      if (labels[order[p]]) ++bin.flagged;
    bin.fraction = static_cast<double>(bin.flagged) / static_cast<double>(bin.count);
  }
  return table;
}

namespace {

// Spectral density at frequency zero over one chain segment, Bartlett
// window with truncation lag floor(sqrt(len)).
double spectral_var(const double* x, std::size_t len) {
  double mean = 0.0;
  for (std::size_t i = 0; i < len; ++i) mean += x[i];
  mean /= static_cast<double>(len);
  const auto lag_max = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(len))));
  double s0 = 0.0;
  for (std::size_t lag = 0; lag < lag_max; ++lag) {
    double gamma = 0.0;
    for (std::size_t i = lag; i < len; ++i)
      gamma += (x[i] - mean) * (x[i - lag] - mean);
    gamma /= static_cast<double>(len);
    const double w = 1.0 - static_cast<double>(lag) / static_cast<double>(lag_max);
    s0 += (lag == 0 ? gamma : 2.0 * w * gamma);
  }
  return s0 / static_cast<double>(len);  // variance of the segment mean
}

}  // namespace

GewekeResult geweke(const std::vector<double>& trace, double first, double last) {
  if (!(first > 0.0) || !(last > 0.0) || first + last > 1.0)
    throw ConfigError("geweke: window fractions must be positive with first+last <= 1");
  if (trace.size() < 100)
    throw DataError("geweke: trace too short (" + std::to_string(trace.size()) +
                    " draws, need 100)");

  const std::size_t n = trace.size();
  const auto n_first = static_cast<std::size_t>(std::floor(first * static_cast<double>(n)));
  const auto n_last = static_cast<std::size_t>(std::floor(last * static_cast<double>(n)));
  if (n_first < 2 || n_last < 2) throw ConfigError("geweke: window too small");

  const double* f = trace.data();
  const double* l = trace.data() + (n - n_last);
  double mf = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < n_first; ++i) mf += f[i];
  for (std::size_t i = 0; i < n_last; ++i) ml += l[i];
  mf /= static_cast<double>(n_first);
  ml /= static_cast<double>(n_last);

  const double vf = spectral_var(f, n_first);
  const double vl = spectral_var(l, n_last);
  const double denom = vf + vl;
  if (!(denom > 0.0))
    throw NumericError("geweke: zero spectral variance (constant trace segment)");

  GewekeResult res;
  res.mean_first = mf;
  res.mean_last = ml;
  res.z = (mf - ml) / std::sqrt(denom);
  res.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(res.z)));
  return res;
}

std::string auc_band(double auc_value) {
  // Compare on the value rounded to two decimals so 0.6351 lands in the
  // same band as the printed 0.64.
  const double r = std::round(auc_value * 100.0) / 100.0;
  if (r < 0.55) return "poor";
  if (r < 0.64) return "fair";
  if (r < 0.71) return "good";
  return "excellent";
}

}  // namespace sentrisk
