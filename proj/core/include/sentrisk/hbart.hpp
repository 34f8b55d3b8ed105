#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sentrisk/design.hpp"

namespace sentrisk {

// Sampler settings for the heteroscedastic tree-ensemble regression
//   y(x) = f(x) + s(x) * xi,   xi ~ N(0,1),
// where f is a sum of `mean_trees` regression trees and s is a positive
// product of `scale_trees` trees whose leaves multiply a base scale.
struct HbartConfig {
  std::size_t mean_trees = 200;
  std::size_t scale_trees = 40;
  std::size_t iterations = 10100;  // total MCMC iterations
  std::size_t burn_in = 100;       // discarded prefix
  std::size_t thin = 1;            // keep every thin-th post-burn draw
  std::size_t snapshot_every = 10; // ensemble snapshots among retained draws
  double p_birth = 0.4;            // structure proposal mix
  double p_death = 0.4;
  double p_change = 0.2;
  double depth_base = 0.95;        // P(split at depth d) = base/(1+d)^power
  double depth_power = 2.0;
  double leaf_k = 2.0;             // mean-leaf prior spread divisor
  double scale_nu = 0.0;           // scale-leaf prior strength; 0 => 2*scale_trees
  std::size_t min_node = 5;        // smallest leaf occupancy a proposal may create
  std::size_t max_cutpoints = 100; // grid size for continuous columns
  std::size_t min_rows = 50;       // smallest fit the sampler accepts

  void validate() const;  // throws ConfigError
  std::size_t retained() const { return (iterations - burn_in) / thin; }
};

struct TreeNode {
  std::int32_t split_col = -1;  // -1 => leaf
  double threshold = 0.0;       // x[split_col] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t depth = 0;
  double leaf_value = 0.0;      // mean trees: additive; scale trees: multiplicative, > 0
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at index 0

  bool is_leaf(std::size_t i) const { return nodes[i].split_col < 0; }
  // Index of the leaf this row routes to.
  std::size_t route(const double* row) const;
  std::size_t leaf_count() const;
};

struct EnsembleDraw {
  std::vector<DecisionTree> mean_trees;
  std::vector<DecisionTree> scale_trees;
};

// Posterior means and per-draw traces, all in months.
struct PosteriorSummary {
  std::vector<double> f_bar;    // posterior mean of f(x) per row
  std::vector<double> s_bar;    // posterior mean of s(x) per row
  std::vector<double> trace_f;  // row-mean of f per retained draw
  std::vector<double> trace_s;  // row-mean of s per retained draw
};

struct TreeEnsembleModel {
  HbartConfig config;
  std::vector<std::string> column_names;
  double y_center = 0.0;           // outcome standardization
  double y_scale = 1.0;
  double scale_base = 1.0;         // sigma0 on the standardized scale
  std::uint64_t seed = 0;
  std::size_t retained_draws = 0;  // (iterations - burn_in) / thin
  std::size_t train_rows = 0;
  std::vector<EnsembleDraw> draws; // every snapshot_every-th retained draw
  PosteriorSummary train_summary;  // accumulated over all retained draws
};

// Runs the Gibbs/Metropolis sampler on the training design. Throws
// ConfigError for inconsistent settings, DataError for too few rows,
// NumericError for a constant outcome.
TreeEnsembleModel fit(const DesignMatrix& X, const std::vector<double>& y,
                      const HbartConfig& cfg, std::uint64_t seed);

// Posterior summary on new rows, averaging over the stored ensemble
// snapshots. Column names must match the training design.
PosteriorSummary predict(const TreeEnsembleModel& model, const DesignMatrix& X);

struct RSquared {
  double r2 = 0.0;
  double adjusted = 0.0;
};

// Fit quality of f_bar against observed y with p regressors:
// r2 = 1 - SSE/SST, adjusted = 1 - (1-r2)(n-1)/(n-p-1).
RSquared r_squared(const std::vector<double>& f_bar, const std::vector<double>& y,
                   std::size_t p);

void save_model(std::ostream& out, const TreeEnsembleModel& model,
                const std::string& manifest_hash);
TreeEnsembleModel load_model(std::istream& in, const std::string& source_name);

}  // namespace sentrisk
