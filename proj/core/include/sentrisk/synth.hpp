#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sentrisk/dataset.hpp"
#include "sentrisk/design.hpp"

namespace sentrisk {

// One generated factor. Categorical factors draw a level from `levels` with
// probabilities `probs`; numeric ones draw uniformly on [lo, hi], rounded
// to integers when `integer` is set (enhancement-points kinds always are).
struct FactorGen {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> levels;
  std::vector<double> probs;
  double lo = 0.0, hi = 1.0;
  bool integer = false;
};

// Additive piecewise function of the generated factors: a base value plus
// per-level lookups, step functions, and linear ramps.
struct LevelTerm {
  std::string feature;
  std::map<std::string, double> values;
  double fallback = 0.0;
};
struct StepTerm {
  std::string feature;
  double threshold = 0.0, below = 0.0, above = 0.0;
};
struct LinearTerm {
  std::string feature;
  double slope = 0.0;
};
struct PiecewiseFn {
  double base = 0.0;
  std::vector<LevelTerm> levels;
  std::vector<StepTerm> steps;
  std::vector<LinearTerm> linear;

  bool empty() const { return levels.empty() && steps.empty() && linear.empty() && base == 0.0; }
};

struct SynthSpec {
  std::size_t n = 20000;
  std::uint64_t seed = 4;
  std::string outcome_name = "SENTTOT0";
  std::vector<FactorGen> relevant;
  std::vector<FactorGen> irrelevant;
  PiecewiseFn true_mean;   // f0, over relevant factors (months)
  PiecewiseFn true_scale;  // s0, over relevant factors (months, must be > 0)
  PiecewiseFn leak;        // shift added to the mean, over irrelevant factors

  void validate() const;
};

// Per-row ground truth kept alongside the generated table.
struct GroundTruth {
  std::vector<double> f0;         // true conditional mean before leak/clamp
  std::vector<double> s0;         // true conditional scale
  std::vector<double> leak_shift; // mean shift from irrelevant factors
};

struct SynthResult {
  Dataset data;    // outcome + relevant + irrelevant columns, schema roles set
  Schema schema;
  GroundTruth truth;
};

// Draws factors independently, then y = clamp(f0 + leak + s0 * xi, 0, 540)
// with xi standard normal. Deterministic in the seed.
SynthResult generate(const SynthSpec& spec);

// Sentencing-flavored default generator: guideline range, criminal-history
// and offense-level scores, count of charges as the relevant factors;
// demographic-style categoricals plus age as irrelevant ones. leak_shift
// adds that many months whenever DSIND == "1".
SynthSpec default_synth_spec(std::size_t n, std::uint64_t seed, double leak_shift = 0.0);

// Brute-force O(n^2) pairwise AUC with half credit for ties. Reference
// implementation for testing the fast one; n capped at 20000.
double oracle_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

// Unpenalized logistic MLE via damped Newton-Raphson on the average
// negative log-likelihood; gradient max-norm below 1e-10 at return.
// Returns [intercept, coef...]. Small problems only (p <= 10, n <= 1000);
// separable data throws NumericError.
std::vector<double> oracle_logit_mle(const DesignMatrix& Z,
                                     const std::vector<std::uint8_t>& labels);

}  // namespace sentrisk
