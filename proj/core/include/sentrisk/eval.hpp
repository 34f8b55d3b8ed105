#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sentrisk {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) .. (1,1), one knot per distinct score
  double auc = 0.0;
};

// ROC and area under it. Ties in scores receive half credit, so the area
// equals the Mann-Whitney probability P(score+ > score-) + P(tie)/2; it is
// accumulated from integer counts and only divided once, which keeps the
// trapezoid sum and the pairwise definition in exact agreement. Throws if
// either class is absent.
RocCurve auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

struct RiskBin {
  std::size_t count = 0;
  std::size_t flagged = 0;
  double fraction = 0.0;
  double score_min = 0.0;
  double score_max = 0.0;
};

struct RiskBinTable {
  std::vector<RiskBin> bins;  // ascending score order
};

// Equal-frequency bins by score rank (stable sort, so equal scores keep
// input order); bin sizes differ by at most one.
RiskBinTable risk_bins(const std::vector<double>& scores,
                       const std::vector<std::uint8_t>& labels, std::size_t k);

struct GewekeResult {
  double z = 0.0;
  double p_value = 1.0;
  double mean_first = 0.0;
  double mean_last = 0.0;
};

// Geweke convergence diagnostic: standardized difference between the mean
// of the first `first` fraction of the chain and the mean of the last
// `last` fraction, with spectral-density-at-zero variance estimates
// (Bartlett window, lag sqrt(segment length)).
GewekeResult geweke(const std::vector<double>& trace, double first = 0.1, double last = 0.5);

// Discrimination band for a reported AUC, applied to the value rounded to
// two decimals: <0.55 poor, 0.55-0.63 fair, 0.64-0.70 good, >=0.71
// excellent.
std::string auc_band(double auc_value);

struct AlphaAucRow {
  double alpha = 0.0;
  double train_auc = 0.0;
  double test_auc = 0.0;
};

}  // namespace sentrisk
