#include "sentrisk/sparse_logit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "sentrisk/csv.hpp"
#include "sentrisk/errors.hpp"
#include "sentrisk/eval.hpp"
#include "sentrisk/rng.hpp"

namespace sentrisk {

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

namespace {

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// Column-major standardized copy of the design plus the transform used.
struct Standardized {
  std::vector<std::vector<double>> cols;  // p columns of length n
  std::vector<double> centers, scales;
  std::size_t n = 0, p = 0;
};

Standardized standardize(const DesignMatrix& Z, bool on) {
  Standardized s;
  s.n = Z.n_rows;
  s.p = Z.n_cols;
  s.cols.assign(s.p, std::vector<double>(s.n));
  s.centers.assign(s.p, 0.0);
  s.scales.assign(s.p, 1.0);
  for (std::size_t j = 0; j < s.p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) mean += Z(i, j);
    mean /= static_cast<double>(s.n);
    double ss = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      const double d = Z(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(s.n));
    if (on) {
      if (sd == 0.0)
        throw NumericError("zero-variance column '" + Z.column_names[j] +
                           "' (cannot standardize)");
      s.centers[j] = mean;
      s.scales[j] = sd;
    }
    auto& col = s.cols[j];
    for (std::size_t i = 0; i < s.n; ++i)
      col[i] = (Z(i, j) - s.centers[j]) / s.scales[j];
  }
  return s;
}

double objective(const std::vector<double>& eta, const std::vector<double>& y, double lambda,
                 const std::vector<double>& beta) {
  // (1/n) sum log(1 + exp(eta)) - y*eta, numerically stable form.
  double nll = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double lse = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    nll += lse - y[i] * e;
  }
  nll /= static_cast<double>(eta.size());
  double pen = 0.0;
  for (double b : beta) pen += std::fabs(b);
  return nll + lambda * pen;
}

struct FitState {
  double beta0 = 0.0;
  std::vector<double> beta;  // standardized scale
  std::vector<double> eta;
};

// Sweep budget per frozen quadratic. A partially solved quadratic is fine:
// the damped outer loop only needs a descent direction, and near
// convergence the warm-started quadratic is solved in a handful of sweeps
// anyway. The cap stops coordinate descent from crawling on nearly
// saturated fits where the curvature is at the weight floor.
constexpr std::size_t kMaxInnerSweeps = 100;

// One coordinate-descent pass over the intercept + the columns listed in
// `cols`, on a fixed quadratic approximation: weights `w` (with precomputed
// mean `wbar` and per-column curvatures `curv`, both already divided by n)
// and gradient residual q_i = w_i*(z_i - eta_i), which equals y_i - p_i at
// the start of the quadratic and is maintained incrementally. Exp-free.
// Returns the largest coefficient change.
double sweep_once(FitState& st, const Standardized& X, std::vector<double>& q,
                  const std::vector<double>& w, double wbar,
                  const std::vector<double>& curv, const std::vector<std::size_t>& cols,
                  double lambda) {
  const std::size_t n = X.n;
  const double dn = static_cast<double>(n);
  double worst = 0.0;

  if (wbar > 0.0) {
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) qsum += q[i];
    const double d0 = qsum / (wbar * dn);
    if (d0 != 0.0) {
      st.beta0 += d0;
      for (std::size_t i = 0; i < n; ++i) {
        st.eta[i] += d0;
        q[i] -= w[i] * d0;
      }
      worst = std::fabs(d0);
    }
  }

  for (std::size_t j : cols) {
    if (curv[j] <= 0.0) continue;  // dead column under these weights
    const auto& xj = X.cols[j];
    double grad = 0.0;
    for (std::size_t i = 0; i < n; ++i) grad += xj[i] * q[i];
    grad /= dn;
    const double zj = grad + curv[j] * st.beta[j];
    const double bnew = soft_threshold(zj, lambda) / curv[j];
    const double delta = bnew - st.beta[j];
    if (delta != 0.0) {
      st.beta[j] = bnew;
      for (std::size_t i = 0; i < n; ++i) {
        st.eta[i] += xj[i] * delta;
        q[i] -= w[i] * xj[i] * delta;
      }
      worst = std::max(worst, std::fabs(delta));
    }
  }
  return worst;
}

// Solves the penalized quadratic to tolerance: full sweeps establish the
// active set, then sweeps restricted to currently-nonzero coefficients run
// until they stall, and a final full sweep confirms no excluded coordinate
// wants back in.
void solve_quadratic(FitState& st, const Standardized& X, std::vector<double>& q,
                     const std::vector<double>& w, double wbar,
                     const std::vector<double>& curv, double lambda, double tol,
                     std::size_t max_sweeps) {
  std::vector<std::size_t> all(X.p);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> active;
  for (std::size_t used = 0; used < max_sweeps;) {
    ++used;
    if (sweep_once(st, X, q, w, wbar, curv, all, lambda) < tol) return;
    active.clear();
    for (std::size_t j = 0; j < X.p; ++j)
      if (st.beta[j] != 0.0) active.push_back(j);
    while (used < max_sweeps) {
      ++used;
      if (sweep_once(st, X, q, w, wbar, curv, active, lambda) < tol) break;
    }
  }
}

// Damped iteratively reweighted least squares at one lambda. Each outer
// iteration freezes the quadratic approximation at the current linear
// predictor (one sigmoid pass), solves the penalized quadratic with
// coordinate sweeps, then backtracks the resulting step by halving until the
// true penalized objective does not increase. The returned trace has one
// entry per outer iteration and is nonincreasing by construction.
std::vector<double> fit_one_lambda(FitState& st, const Standardized& X,
                                   const std::vector<double>& y, double lambda,
                                   const SparseLogitOptions& opt) {
  const std::size_t n = X.n;
  const double dn = static_cast<double>(n);
  std::vector<double> w(n), q(n), curv(X.p);
  std::vector<double> trace;
  double obj = objective(st.eta, y, lambda, st.beta);

  for (std::size_t outer = 0; outer < opt.max_sweeps; ++outer) {
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(st.eta[i]);
      // The floor bounds curvature away from zero on saturated rows. It
      // only limits step sizes: q carries the exact gradient, so the
      // fixed point (and the KKT conditions at it) are unchanged.
      w[i] = std::max(p * (1.0 - p), 1e-5);
      q[i] = y[i] - p;
      wsum += w[i];
    }
    wsum /= dn;
    for (std::size_t j = 0; j < X.p; ++j) {
      const auto& xj = X.cols[j];
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += w[i] * xj[i] * xj[i];
      curv[j] = c / dn;
    }

    const FitState saved = st;
    solve_quadratic(st, X, q, w, wsum, curv, lambda, opt.tol, kMaxInnerSweeps);

    // Line search along the step the quadratic proposed. The linear
    // predictor is linear in (beta0, beta), so states blend exactly. A unit
    // step that ascends is halved until it descends; a unit step that
    // descends is doubled while that keeps helping, which matters on
    // nearly separated fits where the loss is exponentially flat along the
    // step direction and the curvature-implied unit step is far too short.
    const FitState full = st;
    auto blend = [&](double t) {
      st.beta0 = saved.beta0 + t * (full.beta0 - saved.beta0);
      for (std::size_t j = 0; j < X.p; ++j)
        st.beta[j] = saved.beta[j] + t * (full.beta[j] - saved.beta[j]);
      for (std::size_t i = 0; i < n; ++i)
        st.eta[i] = saved.eta[i] + t * (full.eta[i] - saved.eta[i]);
      return objective(st.eta, y, lambda, st.beta);
    };
    const double slack = 1e-12 * (1.0 + std::fabs(obj));
    double step = 1.0;
    double obj_new = objective(st.eta, y, lambda, st.beta);
    if (obj_new > obj + slack) {
      for (int halvings = 0; obj_new > obj + slack && halvings < 30; ++halvings) {
        step *= 0.5;
        obj_new = blend(step);
      }
      if (obj_new > obj + slack) {  // no representable descent left
        st = saved;
        trace.push_back(obj);
        break;
      }
    } else {
      for (int doublings = 0; doublings < 20; ++doublings) {
        const double trial = blend(step * 2.0);
        if (trial < obj_new - slack) {
          step *= 2.0;
          obj_new = trial;
        } else {
          blend(step);  // restore the best point seen
          break;
        }
      }
    }

    double max_delta = std::fabs(st.beta0 - saved.beta0);
    for (std::size_t j = 0; j < X.p; ++j)
      max_delta = std::max(max_delta, std::fabs(st.beta[j] - saved.beta[j]));
    obj = obj_new;
    trace.push_back(obj);
    if (max_delta < opt.tol) break;
  }
  return trace;
}

std::vector<double> make_lambda_grid(const Standardized& X, const std::vector<double>& y,
                                     std::size_t grid_size, double min_ratio) {
  const std::size_t n = X.n;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double lmax = 0.0;
  for (std::size_t j = 0; j < X.p; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += X.cols[j][i] * (y[i] - ybar);
    lmax = std::max(lmax, std::fabs(g) / static_cast<double>(n));
  }
  if (!(lmax > 0.0)) lmax = 1e-3;  // all columns orthogonal to the labels
  lmax *= 1.0 + 1e-9;  // nudge above the KKT edge so the first fit is exactly zero
  std::vector<double> grid;
  grid.reserve(grid_size);
  if (grid_size == 1) {
    grid.push_back(lmax);
    return grid;
  }
  const double lmin = lmax * min_ratio;
  const double step = (std::log(lmin) - std::log(lmax)) / static_cast<double>(grid_size - 1);
  for (std::size_t t = 0; t < grid_size; ++t)
    grid.push_back(std::exp(std::log(lmax) + step * static_cast<double>(t)));
  return grid;
}

void check_labels(const std::vector<std::uint8_t>& labels) {
  std::size_t pos = 0;
  for (auto v : labels) pos += (v ? 1 : 0);
  if (pos == 0 || pos == labels.size())
    throw NumericError("logistic fit needs both classes, have " + std::to_string(pos) +
                       " positives of " + std::to_string(labels.size()));
}

LogitPath fit_path_impl(const DesignMatrix& Z, const std::vector<std::uint8_t>& labels,
                        std::vector<double> lambdas, const SparseLogitOptions& opt) {
  if (Z.n_rows != labels.size())
    throw DataError("fit_path: design rows and labels differ in length");
  if (Z.n_rows == 0) throw DataError("fit_path: empty design");
  check_labels(labels);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw ConfigError("lambda grid entries must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw ConfigError("lambda grid must be strictly decreasing");
  }

  const Standardized X = standardize(Z, opt.standardize);
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] ? 1.0 : 0.0;

  LogitPath path;
  path.lambdas = std::move(lambdas);
  path.column_names = Z.column_names;
  path.column_groups = Z.column_groups;
  path.centers = X.centers;
  path.scales = X.scales;
  path.standardized = opt.standardize;

  FitState st;
  st.beta.assign(X.p, 0.0);
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(y.size());
  st.beta0 = std::log(ybar / (1.0 - ybar));  // base-rate intercept start
  st.eta.assign(X.n, st.beta0);

  for (double lambda : path.lambdas) {
    path.objective_traces.push_back(fit_one_lambda(st, X, y, lambda, opt));
    // Back-transform to the original column scale.
    std::vector<double> coef(X.p);
    double b0 = st.beta0;
    std::size_t nz = 0;
    for (std::size_t j = 0; j < X.p; ++j) {
      coef[j] = st.beta[j] / X.scales[j];
      b0 -= coef[j] * X.centers[j];
      if (st.beta[j] != 0.0) ++nz;
    }
    path.intercepts.push_back(b0);
    path.coefficients.push_back(std::move(coef));
    path.nonzero.push_back(nz);
  }
  return path;
}

}  // namespace

LogitPath fit_path(const DesignMatrix& Z, const std::vector<std::uint8_t>& labels,
                   std::size_t grid_size, const SparseLogitOptions& opt) {
  if (grid_size == 0) throw ConfigError("fit_path: grid_size must be positive");
  if (Z.n_rows != labels.size())
    throw DataError("fit_path: design rows and labels differ in length");
  if (Z.n_rows == 0) throw DataError("fit_path: empty design");
  check_labels(labels);
  const Standardized X = standardize(Z, opt.standardize);
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] ? 1.0 : 0.0;
  return fit_path_impl(Z, labels, make_lambda_grid(X, y, grid_size, opt.lambda_min_ratio),
                       opt);
}

LogitPath fit_path_at(const DesignMatrix& Z, const std::vector<std::uint8_t>& labels,
                      const std::vector<double>& lambdas, const SparseLogitOptions& opt) {
  if (lambdas.empty()) throw ConfigError("fit_path_at: empty lambda grid");
  return fit_path_impl(Z, labels, lambdas, opt);
}

SparseLogitModel select_lambda(LogitPath& path, const DesignMatrix& Z,
                               const std::vector<std::uint8_t>& labels, std::uint64_t seed,
                               const SparseLogitOptions& opt) {
  const std::size_t folds = opt.cv_folds;
  if (folds < 2) throw ConfigError("select_lambda: need at least 2 folds");
  const std::size_t n = Z.n_rows;
  if (n != labels.size()) throw DataError("select_lambda: labels length mismatch");
  if (n < 2 * folds)
    throw DataError("select_lambda: need at least " + std::to_string(2 * folds) + " rows");

  // Deal a seeded shuffle round-robin into folds; every fold and every
  // training complement must contain both classes.
  std::vector<std::size_t> fold_of(n);
  auto deal = [&](std::uint64_t s) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(s);
    rng.shuffle(order);
    for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos % folds;
  };
  auto folds_ok = [&]() {
    for (std::size_t f = 0; f < folds; ++f) {
      std::size_t in_pos = 0, in_neg = 0, out_pos = 0, out_neg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool inside = fold_of[i] == f;
        if (labels[i]) (inside ? in_pos : out_pos) += 1;
        else (inside ? in_neg : out_neg) += 1;
      }
      if (!in_pos || !in_neg || !out_pos || !out_neg) return false;
    }
    return true;
  };
  deal(seed);
  if (!folds_ok()) {
    deal(seed ^ 0x9e3779b97f4a7c15ull);
    if (!folds_ok())
      throw NumericError("select_lambda: a class is too rare to fill every fold");
  }

  const std::size_t L = path.lambdas.size();
  // Out-of-fold AUC for one held-out fold across the whole path.
  auto fold_auc = [&](std::size_t f) {
    DesignMatrix tr, te;
    tr.n_cols = te.n_cols = Z.n_cols;
    tr.column_names = te.column_names = Z.column_names;
    tr.column_groups = te.column_groups = Z.column_groups;
    std::vector<std::uint8_t> ytr, yte;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = Z.row(i);
      if (fold_of[i] == f) {
        te.values.insert(te.values.end(), row, row + Z.n_cols);
        te.row_ids.push_back(i < Z.row_ids.size() ? Z.row_ids[i] : static_cast<std::int64_t>(i));
        yte.push_back(labels[i]);
      } else {
        tr.values.insert(tr.values.end(), row, row + Z.n_cols);
        tr.row_ids.push_back(i < Z.row_ids.size() ? Z.row_ids[i] : static_cast<std::int64_t>(i));
        ytr.push_back(labels[i]);
      }
    }
    tr.n_rows = ytr.size();
    te.n_rows = yte.size();
    SparseLogitOptions fopt = opt;
    LogitPath fpath = fit_path_at(tr, ytr, path.lambdas, fopt);
    std::vector<double> aucs(L);
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> score(te.n_rows);
      for (std::size_t i = 0; i < te.n_rows; ++i) {
        double eta = fpath.intercepts[l];
        const double* row = te.row(i);
        for (std::size_t j = 0; j < te.n_cols; ++j) eta += row[j] * fpath.coefficients[l][j];
        score[i] = eta;
      }
      aucs[l] = auc(score, yte).auc;
    }
    return aucs;
  };

  // Folds run concurrently but no wider than the hardware; results join in
  // fold order either way, so the output is identical on any machine.
  const std::size_t width =
      std::max<std::size_t>(1, std::min<std::size_t>(folds, std::thread::hardware_concurrency()));
  std::vector<std::vector<double>> per_fold(folds);
  for (std::size_t base = 0; base < folds; base += width) {
    const std::size_t stop = std::min(folds, base + width);
    std::vector<std::future<std::vector<double>>> jobs;
    for (std::size_t f = base + 1; f < stop; ++f)
      jobs.push_back(std::async(std::launch::async, fold_auc, f));
    per_fold[base] = fold_auc(base);  // run one batch member on this thread
    for (std::size_t f = base + 1; f < stop; ++f) per_fold[f] = jobs[f - base - 1].get();
  }

  path.cv_auc_mean.assign(L, 0.0);
  path.cv_auc_se.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double m = 0.0;
    for (std::size_t f = 0; f < folds; ++f) m += per_fold[f][l];
    m /= static_cast<double>(folds);
    double ss = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const double d = per_fold[f][l] - m;
      ss += d * d;
    }
    path.cv_auc_mean[l] = m;
    path.cv_auc_se[l] =
        folds > 1 ? std::sqrt(ss / static_cast<double>(folds - 1) / static_cast<double>(folds))
                  : 0.0;
  }

  // Best mean, then the one-standard-error rule toward heavier penalty.
  std::size_t best = 0;
  for (std::size_t l = 1; l < L; ++l)
    if (path.cv_auc_mean[l] > path.cv_auc_mean[best]) best = l;
  const double floor_auc = path.cv_auc_mean[best] - path.cv_auc_se[best];
  std::size_t chosen = best;
  for (std::size_t l = 0; l <= best; ++l) {  // grid is decreasing: l=0 is largest lambda
    if (path.cv_auc_mean[l] >= floor_auc) {
      chosen = l;
      break;
    }
  }

  SparseLogitModel model;
  model.intercept = path.intercepts[chosen];
  model.coefficients = path.coefficients[chosen];
  model.lambda = path.lambdas[chosen];
  model.fold_seed = seed;
  model.column_names = path.column_names;
  model.column_groups = path.column_groups;
  return model;
}

std::vector<double> predict_risk(const SparseLogitModel& model, const DesignMatrix& Z) {
  if (Z.column_names.size() != model.column_names.size())
    throw DataError("predict_risk: design has " + std::to_string(Z.column_names.size()) +
                    " columns, model has " + std::to_string(model.column_names.size()));
  for (std::size_t j = 0; j < Z.column_names.size(); ++j)
    if (Z.column_names[j] != model.column_names[j])
      throw DataError("predict_risk: column mismatch at position " + std::to_string(j) +
                      ": design '" + Z.column_names[j] + "' vs model '" +
                      model.column_names[j] + "'");
  std::vector<double> out(Z.n_rows);
  for (std::size_t i = 0; i < Z.n_rows; ++i) {
    double eta = model.intercept;
    const double* row = Z.row(i);
    for (std::size_t j = 0; j < Z.n_cols; ++j) eta += row[j] * model.coefficients[j];
    out[i] = std::clamp(sigmoid(eta), 1e-15, 1.0 - 1e-15);
  }
  return out;
}

std::vector<FactorCoefStats> coefficient_report(const SparseLogitModel& model) {
  std::vector<FactorCoefStats> report;
  std::vector<std::string> seen;
  for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
    const std::string& g = model.column_groups.size() > j ? model.column_groups[j]
                                                          : model.column_names[j];
    FactorCoefStats* row = nullptr;
    for (auto& r : report)
      if (r.factor == g) {
        row = &r;
        break;
      }
    if (!row) {
      report.push_back(FactorCoefStats{g, 0, 0, 0.0, 0.0});
      row = &report.back();
    }
    const double b = model.coefficients[j];
    ++row->columns;
    if (b != 0.0) {
      if (row->nonzero == 0) {
        row->min_coef = row->max_coef = b;
      } else {
        row->min_coef = std::min(row->min_coef, b);
        row->max_coef = std::max(row->max_coef, b);
      }
      ++row->nonzero;
    }
  }
  return report;
}

double path_objective(const LogitPath& path, std::size_t index, const DesignMatrix& Z,
                      const std::vector<std::uint8_t>& labels) {
  if (index >= path.lambdas.size()) throw ConfigError("path_objective: index out of range");
  const std::size_t n = Z.n_rows;
  std::vector<double> beta_std(Z.n_cols), eta(n);
  double b0 = path.intercepts[index];
  for (std::size_t j = 0; j < Z.n_cols; ++j) {
    beta_std[j] = path.coefficients[index][j] * path.scales[j];
    b0 += path.coefficients[index][j] * path.centers[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double e = b0;
    const double* row = Z.row(i);
    for (std::size_t j = 0; j < Z.n_cols; ++j)
      e += (row[j] - path.centers[j]) / path.scales[j] * beta_std[j];
    eta[i] = e;
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] ? 1.0 : 0.0;
  return objective(eta, y, path.lambdas[index], beta_std);
}

double max_kkt_violation(const LogitPath& path, std::size_t index, const DesignMatrix& Z,
                         const std::vector<std::uint8_t>& labels) {
  if (index >= path.lambdas.size())
    throw ConfigError("max_kkt_violation: index out of range");
  const std::size_t n = Z.n_rows;
  const double lambda = path.lambdas[index];

  // Reconstruct the standardized coefficients and linear predictor.
  std::vector<double> beta_std(Z.n_cols);
  double b0_std = path.intercepts[index];
  for (std::size_t j = 0; j < Z.n_cols; ++j) {
    beta_std[j] = path.coefficients[index][j] * path.scales[j];
    b0_std += path.coefficients[index][j] * path.centers[j];
  }
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = b0_std;
    const double* row = Z.row(i);
    for (std::size_t j = 0; j < Z.n_cols; ++j)
      eta += (row[j] - path.centers[j]) / path.scales[j] * beta_std[j];
    resid[i] = (labels[i] ? 1.0 : 0.0) - sigmoid(eta);
  }

  double worst = 0.0;
  {
    double g0 = 0.0;
    for (double r : resid) g0 += r;
    worst = std::fabs(g0 / static_cast<double>(n));  // intercept is unpenalized
  }
  for (std::size_t j = 0; j < Z.n_cols; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      g += (Z(i, j) - path.centers[j]) / path.scales[j] * resid[i];
    g /= static_cast<double>(n);
    double v;
    if (beta_std[j] == 0.0)
      v = std::max(0.0, std::fabs(g) - lambda);
    else
      v = std::fabs(g - lambda * (beta_std[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

void save_logit_model(std::ostream& out, const SparseLogitModel& model,
                      const std::string& manifest_hash) {
  out << "SENTRISK_LOGIT 1\n";
  out << "manifest " << (manifest_hash.empty() ? "-" : manifest_hash) << '\n';
  out << "lambda " << format_double(model.lambda) << '\n';
  out << "fold_seed " << model.fold_seed << '\n';
  out << "intercept " << format_double(model.intercept) << '\n';
  out << "columns " << model.coefficients.size() << '\n';
  for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
    // Numbers first; the name (which may contain '=' or '*') runs to the
    // tab, the group to end of line.
    out << format_double(model.coefficients[j]) << '\t' << model.column_names[j] << '\t'
        << (j < model.column_groups.size() ? model.column_groups[j] : model.column_names[j])
        << '\n';
  }
}

SparseLogitModel load_logit_model(std::istream& in, const std::string& source_name) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError(source_name + ": bad model file: " + why);
  };
  std::string word;
  int ver = 0;
  if (!(in >> word >> ver) || word != "SENTRISK_LOGIT" || ver != 1)
    throw fail("expected SENTRISK_LOGIT 1 header");
  SparseLogitModel model;
  std::string manifest;
  std::size_t ncols = 0;
  if (!(in >> word >> manifest) || word != "manifest") throw fail("missing manifest line");
  if (!(in >> word >> model.lambda) || word != "lambda") throw fail("missing lambda");
  if (!(in >> word >> model.fold_seed) || word != "fold_seed") throw fail("missing fold_seed");
  if (!(in >> word >> model.intercept) || word != "intercept") throw fail("missing intercept");
  if (!(in >> word >> ncols) || word != "columns") throw fail("missing columns count");
  in.ignore();  // newline
  model.coefficients.reserve(ncols);
  std::string line;
  for (std::size_t j = 0; j < ncols; ++j) {
    if (!std::getline(in, line)) throw fail("truncated coefficient table");
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw fail("coefficient line " + std::to_string(j + 1) + " needs 3 tab-separated fields");
    const auto v = parse_double(line.substr(0, t1));
    if (!v) throw fail("unparseable coefficient on line " + std::to_string(j + 1));
    model.coefficients.push_back(*v);
    model.column_names.push_back(line.substr(t1 + 1, t2 - t1 - 1));
    model.column_groups.push_back(line.substr(t2 + 1));
  }
  return model;
}

}  // namespace sentrisk