#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sentrisk/design.hpp"

namespace sentrisk {

struct SparseLogitOptions {
  bool standardize = true;          // center/scale columns internally
  double lambda_min_ratio = 1e-4;   // smallest lambda = ratio * lambda_max
  double tol = 1e-7;                // max |coef change| per sweep to stop
  std::size_t max_sweeps = 10000;
  std::size_t cv_folds = 10;
};

// Full regularization path for L1-penalized logistic regression,
// objective (1/n) sum NLL + lambda * sum_j |beta_j| with an unpenalized
// intercept. Coefficients are stored on the original column scale.
struct LogitPath {
  std::vector<double> lambdas;                    // strictly decreasing
  std::vector<double> intercepts;                 // per lambda
  std::vector<std::vector<double>> coefficients;  // per lambda, original scale
  std::vector<std::size_t> nonzero;               // per lambda
  std::vector<double> cv_auc_mean;                // filled by select_lambda
  std::vector<double> cv_auc_se;
  std::vector<std::string> column_names;
  std::vector<std::string> column_groups;
  std::vector<double> centers, scales;            // standardization used in fit
  bool standardized = true;
  // Objective after each coordinate-descent sweep, one trace per lambda;
  // nonincreasing by construction (diagnostic, cheap to keep).
  std::vector<std::vector<double>> objective_traces;
};

// Final fitted model at one lambda.
struct SparseLogitModel {
  double intercept = 0.0;
  std::vector<double> coefficients;  // original scale, aligned with column_names
  double lambda = 0.0;
  std::uint64_t fold_seed = 0;
  std::vector<std::string> column_names;
  std::vector<std::string> column_groups;
};

// Fits the whole path on a log-spaced grid from lambda_max (smallest lambda
// with an all-zero solution) down to lambda_max * lambda_min_ratio, warm
// starting each fit from the previous one. grid_size >= 1. Labels must
// contain both classes.
LogitPath fit_path(const DesignMatrix& Z, const std::vector<std::uint8_t>& labels,
                   std::size_t grid_size, const SparseLogitOptions& opt = {});

// Same, but on a caller-fixed lambda grid (used for cross-validation folds).
LogitPath fit_path_at(const DesignMatrix& Z, const std::vector<std::uint8_t>& labels,
                      const std::vector<double>& lambdas, const SparseLogitOptions& opt = {});

// K-fold cross-validated out-of-fold AUC per lambda; picks the largest
// lambda whose mean AUC is within one standard error of the best mean, and
// returns the full-data fit at that lambda. Fills path.cv_auc_mean/se.
// Fold assignment is a seeded shuffle dealt round-robin; if any fold is
// missing a class the deal is reshuffled once with a derived seed before
// giving up.
SparseLogitModel select_lambda(LogitPath& path, const DesignMatrix& Z,
                               const std::vector<std::uint8_t>& labels, std::uint64_t seed,
                               const SparseLogitOptions& opt = {});

// P(flag = 1) for each row; always strictly inside (0,1). Column names must
// match the model exactly.
std::vector<double> predict_risk(const SparseLogitModel& model, const DesignMatrix& Z);

struct FactorCoefStats {
  std::string factor;
  std::size_t columns = 0;
  std::size_t nonzero = 0;
  double min_coef = 0.0;  // over the factor's columns (0 when none nonzero)
  double max_coef = 0.0;
};

// Per-factor summary of the expanded coefficients, in first-appearance
// order of model.column_groups.
std::vector<FactorCoefStats> coefficient_report(const SparseLogitModel& model);

// Soft-threshold operator: sign(z) * max(|z| - g, 0).
double soft_threshold(double z, double g);

// Largest KKT violation of the path entry at `index`, measured on the
// standardized problem the path was fitted on. Near-zero for a converged
// fit: |grad_j| <= lambda + tol for zero coefficients, |grad_j + lambda *
// sign(beta_j)| <= tol for active ones.
double max_kkt_violation(const LogitPath& path, std::size_t index, const DesignMatrix& Z,
                         const std::vector<std::uint8_t>& labels);

// Objective value (1/n) sum NLL + lambda * sum |beta_std| for a path entry.
double path_objective(const LogitPath& path, std::size_t index, const DesignMatrix& Z,
                      const std::vector<std::uint8_t>& labels);

void save_logit_model(std::ostream& out, const SparseLogitModel& model,
                      const std::string& manifest_hash);
SparseLogitModel load_logit_model(std::istream& in, const std::string& source_name);

}  // namespace sentrisk
