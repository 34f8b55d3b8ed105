#include "sentrisk/synth.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sentrisk/errors.hpp"
#include "sentrisk/rng.hpp"

namespace sentrisk {

namespace {

void validate_factor(const FactorGen& f) {
  if (f.name.empty()) throw ConfigError("synth factor with empty name");
  if (f.kind == ColumnKind::categorical) {
    if (f.levels.size() < 2)
      throw ConfigError("synth factor '" + f.name + "' needs at least 2 levels");
    if (f.levels.size() != f.probs.size())
      throw ConfigError("synth factor '" + f.name + "': levels/probs length mismatch");
    double sum = 0.0;
    for (double p : f.probs) {
      if (!(p > 0.0)) throw ConfigError("synth factor '" + f.name + "': probs must be > 0");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw ConfigError("synth factor '" + f.name + "': probs must sum to 1");
  } else {
    if (!(f.lo < f.hi))
      throw ConfigError("synth factor '" + f.name + "': need lo < hi");
  }
}

// Row accessor used by PiecewiseFn evaluation.
struct RowView {
  const std::vector<const FactorGen*>& gens;
  const std::vector<std::string>& level_cells;  // per factor, "" when numeric
  const std::vector<double>& num_cells;

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (gens[i]->name == name) return i;
    throw ConfigError("synth function references unknown factor '" + name + "'");
  }
};

double eval_fn(const PiecewiseFn& fn, const RowView& row) {
  double v = fn.base;
  for (const auto& t : fn.levels) {
    const std::size_t i = row.index_of(t.feature);
    const auto it = t.values.find(row.level_cells[i]);
    v += it == t.values.end() ? t.fallback : it->second;
  }
  for (const auto& t : fn.steps) {
    const std::size_t i = row.index_of(t.feature);
    v += row.num_cells[i] > t.threshold ? t.above : t.below;
  }
  for (const auto& t : fn.linear) {
    const std::size_t i = row.index_of(t.feature);
    v += t.slope * row.num_cells[i];
  }
  return v;
}

}  // namespace

void SynthSpec::validate() const {
  if (n < 2) throw ConfigError("synth: n must be at least 2");
  if (outcome_name.empty()) throw ConfigError("synth: outcome needs a name");
  if (relevant.empty()) throw ConfigError("synth: need at least one relevant factor");
  for (const auto& f : relevant) validate_factor(f);
  for (const auto& f : irrelevant) validate_factor(f);
  std::vector<std::string> names{outcome_name};
  for (const auto& f : relevant) names.push_back(f.name);
  for (const auto& f : irrelevant) names.push_back(f.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw ConfigError("synth: duplicate factor name");
}

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;

  std::vector<const FactorGen*> gens;
  for (const auto& f : spec.relevant) gens.push_back(&f);
  for (const auto& f : spec.irrelevant) gens.push_back(&f);
  const std::size_t relevant_count = spec.relevant.size();

  SynthResult out;
  out.schema.columns.push_back({spec.outcome_name, ColumnKind::numeric, ColumnRole::outcome});
  for (std::size_t g = 0; g < gens.size(); ++g)
    out.schema.columns.push_back(
        {gens[g]->name, gens[g]->kind,
         g < relevant_count ? ColumnRole::relevant : ColumnRole::irrelevant});
  out.schema.validate();

  Dataset& ds = out.data;
  ds.columns.resize(out.schema.columns.size());
  for (std::size_t c = 0; c < out.schema.columns.size(); ++c)
    ds.columns[c].spec = out.schema.columns[c];

  // Sorted level sets up front so codes are final from the start.
  std::vector<std::vector<std::int32_t>> sorted_code_of(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) {
    if (gens[g]->kind != ColumnKind::categorical) continue;
    auto& col = ds.columns[g + 1];
    col.levels = gens[g]->levels;
    std::sort(col.levels.begin(), col.levels.end());
    sorted_code_of[g].resize(gens[g]->levels.size());
    for (std::size_t l = 0; l < gens[g]->levels.size(); ++l) {
      const auto it =
          std::lower_bound(col.levels.begin(), col.levels.end(), gens[g]->levels[l]);
      sorted_code_of[g][l] = static_cast<std::int32_t>(it - col.levels.begin());
    }
  }

  out.truth.f0.resize(n);
  out.truth.s0.resize(n);
  out.truth.leak_shift.resize(n);

  Rng rng(spec.seed);
  std::vector<std::string> level_cells(gens.size());
  std::vector<double> num_cells(gens.size());
  RowView row{gens, level_cells, num_cells};

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const FactorGen& f = *gens[g];
      auto& col = ds.columns[g + 1];
      if (f.kind == ColumnKind::categorical) {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = f.levels.size() - 1;
        for (std::size_t l = 0; l < f.levels.size(); ++l) {
          acc += f.probs[l];
          if (u <= acc) {
            pick = l;
            break;
          }
        }
        col.code.push_back(sorted_code_of[g][pick]);
        level_cells[g] = f.levels[pick];
        num_cells[g] = 0.0;
      } else {
        double v = f.lo + (f.hi - f.lo) * rng.uniform();
        if (f.integer || f.kind == ColumnKind::enhancement_points) v = std::round(v);
        col.num.push_back(v);
        level_cells[g].clear();
        num_cells[g] = v;
      }
    }
    const double f0 = eval_fn(spec.true_mean, row);
    const double s0 = eval_fn(spec.true_scale, row);
    if (!(s0 > 0.0))
      throw ConfigError("synth: true scale must be positive everywhere, got " +
                        std::to_string(s0) + " at row " + std::to_string(i));
    const double shift = spec.leak.empty() ? 0.0 : eval_fn(spec.leak, row);
    out.truth.f0[i] = f0;
    out.truth.s0[i] = s0;
    out.truth.leak_shift[i] = shift;

    const double y =
        std::clamp(f0 + shift + s0 * rng.normal(), 0.0, kSentenceCapMonths);
    ds.columns[0].num.push_back(y);
    ds.row_ids.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

SynthSpec default_synth_spec(std::size_t n, std::uint64_t seed, double leak_shift) {
  SynthSpec spec;
  spec.n = n;
  spec.seed = seed;

  FactorGen glrange{"GLRANGE", ColumnKind::categorical,
                    {"A0-6", "B6-21", "C21-60", "D60-150", "E150+"},
                    {0.30, 0.30, 0.20, 0.15, 0.05}};
  FactorGen crhist{"XCRHISSR", ColumnKind::numeric, {}, {}, 0.0, 6.0, true};
  FactorGen offlevel{"XFOLSOR", ColumnKind::numeric, {}, {}, 1.0, 43.0, false};
  FactorGen counts{"NOCOUNTS", ColumnKind::enhancement_points, {}, {}, 1.0, 9.0, true};
  spec.relevant = {glrange, crhist, offlevel, counts};

  spec.irrelevant = {
      {"MONRACE", ColumnKind::categorical, {"1", "2", "3", "5"}, {0.50, 0.25, 0.18, 0.07}},
      {"MONSEX", ColumnKind::categorical, {"0", "1"}, {0.84, 0.16}},
      {"DSIND", ColumnKind::categorical, {"0", "1"}, {0.50, 0.50}},
      {"MONCIRC", ColumnKind::categorical,
       {"C1", "C2", "C3", "C4", "C5"}, {0.2, 0.2, 0.2, 0.2, 0.2}},
      {"AGE", ColumnKind::numeric, {}, {}, 18.0, 75.0, true},
  };

  spec.true_mean.base = 4.0;
  spec.true_mean.levels = {{"GLRANGE",
                            {{"A0-6", 0.0}, {"B6-21", 10.0}, {"C21-60", 32.0},
                             {"D60-150", 85.0}, {"E150+", 230.0}},
                            0.0}};
  spec.true_mean.linear = {{"XCRHISSR", 3.0}, {"XFOLSOR", 1.1}, {"NOCOUNTS", 1.5}};

  spec.true_scale.base = 2.0;
  spec.true_scale.levels = {{"GLRANGE",
                             {{"A0-6", 1.5}, {"B6-21", 4.0}, {"C21-60", 9.0},
                              {"D60-150", 22.0}, {"E150+", 45.0}},
                             0.0}};

  if (leak_shift != 0.0)
    spec.leak.levels = {{"DSIND", {{"1", leak_shift}}, 0.0}};
  return spec;
}

double oracle_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size())
    throw DataError("oracle_auc: scores and labels differ in length");
  if (scores.size() > 10000)
    throw ConfigError("oracle_auc: quadratic reference capped at 10000 rows");
  double num = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  if (pairs == 0) throw NumericError("oracle_auc: needs both classes");
  return num / static_cast<double>(pairs);
}

std::vector<double> oracle_logit_mle(const DesignMatrix& Z,
                                     const std::vector<std::uint8_t>& labels) {
  const std::size_t n = Z.n_rows, p = Z.n_cols;
  if (n != labels.size()) throw DataError("oracle_logit_mle: labels length mismatch");
  if (p > 10 || n > 1000)
    throw ConfigError("oracle_logit_mle: reference solver capped at p <= 10, n <= 1000");
  std::size_t pos = 0;
  for (auto v : labels) pos += (v ? 1 : 0);
  if (pos == 0 || pos == n) throw NumericError("oracle_logit_mle: needs both classes");

  const auto q = static_cast<Eigen::Index>(p + 1);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), q);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j) + 1) = Z(i, j);
    y(static_cast<Eigen::Index>(i)) = labels[i] ? 1.0 : 0.0;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  const auto nll = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = X * b;
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double e = eta(i);
      s += (e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y(i) * e;
    }
    return s / static_cast<double>(n);
  };

  double cur = nll(beta);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd prob(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-12);
    }
    const Eigen::VectorXd grad = X.transpose() * (prob - y) / static_cast<double>(n);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-10) {
      std::vector<double> out(static_cast<std::size_t>(q));
      for (Eigen::Index k = 0; k < q; ++k) out[static_cast<std::size_t>(k)] = beta(k);
      return out;
    }
    const Eigen::MatrixXd H =
        X.transpose() * w.asDiagonal() * X / static_cast<double>(n);
    Eigen::VectorXd step = H.ldlt().solve(grad);
    if (!step.allFinite()) throw NumericError("oracle_logit_mle: singular Hessian");
    // Backtracking keeps the iteration inside the basin.
    double t = 1.0;
    for (int half = 0; half < 40; ++half) {
      const Eigen::VectorXd cand = beta - t * step;
      const double v = nll(cand);
      if (v <= cur) {
        beta = cand;
        cur = v;
        break;
      }
      t *= 0.5;
      if (half == 39) throw NumericError("oracle_logit_mle: line search failed");
    }
    if (beta.lpNorm<Eigen::Infinity>() > 15.0)
      throw NumericError("oracle_logit_mle: diverging coefficients (separable data?)");
  }
  throw NumericError("oracle_logit_mle: did not converge in 200 iterations");
}

}  // namespace sentrisk
