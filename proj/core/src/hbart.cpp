#include "sentrisk/hbart.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "sentrisk/csv.hpp"
#include "sentrisk/errors.hpp"
#include "sentrisk/rng.hpp"

namespace sentrisk {

void HbartConfig::validate() const {
  if (mean_trees == 0 || scale_trees == 0)
    throw ConfigError("hbart: need at least one mean tree and one scale tree");
  if (iterations <= burn_in)
    throw ConfigError("hbart: iterations must exceed burn_in");
  if (thin == 0) throw ConfigError("hbart: thin must be positive");
  if ((iterations - burn_in) % thin != 0)
    throw ConfigError("hbart: iterations - burn_in must be divisible by thin");
  if (snapshot_every == 0) throw ConfigError("hbart: snapshot_every must be positive");
  if (!(p_birth > 0.0) || !(p_death > 0.0) || p_change < 0.0 ||
      std::fabs(p_birth + p_death + p_change - 1.0) > 1e-9)
    throw ConfigError("hbart: move probabilities must be positive and sum to 1");
  if (!(depth_base > 0.0 && depth_base < 1.0))
    throw ConfigError("hbart: depth_base must lie in (0,1)");
  if (depth_power < 0.0) throw ConfigError("hbart: depth_power must be nonnegative");
  if (!(leaf_k > 0.0)) throw ConfigError("hbart: leaf_k must be positive");
  if (scale_nu < 0.0) throw ConfigError("hbart: scale_nu must be nonnegative");
  if (min_node == 0) throw ConfigError("hbart: min_node must be positive");
  if (max_cutpoints == 0) throw ConfigError("hbart: max_cutpoints must be positive");
  if (min_rows < 2) throw ConfigError("hbart: min_rows must be at least 2");
}

std::size_t DecisionTree::route(const double* row) const {
  std::size_t i = 0;
  while (nodes[i].split_col >= 0) {
    const TreeNode& nd = nodes[i];
    i = static_cast<std::size_t>(row[nd.split_col] <= nd.threshold ? nd.left : nd.right);
  }
  return i;
}

std::size_t DecisionTree::leaf_count() const {
  std::size_t c = 0;
  for (const auto& nd : nodes) c += (nd.split_col == -1);
  return c;
}

namespace {

constexpr std::int32_t kDead = -2;  // recycled node slot

// Preorder copy that drops dead/unreachable slots.
DecisionTree compact_tree(const DecisionTree& t) {
  DecisionTree out;
  out.nodes.reserve(t.nodes.size());
  struct Item { std::int32_t old_idx; std::int32_t new_parent; bool right; };
  std::vector<Item> work;
  work.push_back({0, -1, false});
  while (!work.empty()) {
    const Item it = work.back();
    work.pop_back();
    const TreeNode& src = t.nodes[static_cast<std::size_t>(it.old_idx)];
    const auto ni = static_cast<std::int32_t>(out.nodes.size());
    out.nodes.push_back(src);
    out.nodes.back().left = out.nodes.back().right = -1;
    if (it.new_parent >= 0) {
      auto& parent = out.nodes[static_cast<std::size_t>(it.new_parent)];
      (it.right ? parent.right : parent.left) = ni;
    }
    if (src.split_col >= 0) {
      // push right first so left is emitted first (preorder)
      work.push_back({src.right, ni, true});
      work.push_back({src.left, ni, false});
    }
  }
  return out;
}

struct Cutpoints {
  std::vector<std::vector<double>> by_col;
  std::vector<std::int32_t> avail;  // columns with at least one cutpoint
};

Cutpoints build_cutpoints(const DesignMatrix& X, std::size_t max_cuts) {
  Cutpoints cp;
  cp.by_col.resize(X.n_cols);
  std::vector<double> vals;
  for (std::size_t c = 0; c < X.n_cols; ++c) {
    vals.clear();
    vals.reserve(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) vals.push_back(X(r, c));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    auto& cuts = cp.by_col[c];
    if (vals.size() < 2) continue;  // constant column: no usable rule
    if (vals.size() - 1 <= max_cuts) {
      // midpoints between consecutive distinct values (an indicator column
      // gets the single cutpoint 0.5)
      for (std::size_t i = 0; i + 1 < vals.size(); ++i)
        cuts.push_back(0.5 * (vals[i] + vals[i + 1]));
    } else {
      const double lo = vals.front(), hi = vals.back();
      for (std::size_t t = 0; t < max_cuts; ++t)
        cuts.push_back(lo + (hi - lo) * static_cast<double>(t + 1) /
                                static_cast<double>(max_cuts + 1));
    }
    cp.avail.push_back(static_cast<std::int32_t>(c));
  }
  return cp;
}

// Sufficient statistics of one node. Mean trees use (a,b) = (sum w, sum
// w*r); scale trees use a = sum u with b unused.
struct NodeStats {
  double a = 0.0;
  double b = 0.0;
  std::size_t n = 0;
};

NodeStats operator+(const NodeStats& x, const NodeStats& y) {
  return {x.a + y.a, x.b + y.b, x.n + y.n};
}

// Gaussian leaf with N(0, tau^2) prior over weighted rows.
struct MeanLeaf {
  const double* r;  // full residual including this tree's own contribution
  const double* w;  // 1 / s^2
  double tau2;

  void add(NodeStats& st, std::size_t i) const {
    st.a += w[i];
    st.b += w[i] * r[i];
    ++st.n;
  }
  // Log marginal likelihood of the node, dropping factors that cancel
  // between the two sides of any structure proposal.
  double score(const NodeStats& st) const {
    const double denom = 1.0 + tau2 * st.a;
    return -0.5 * std::log(denom) + 0.5 * tau2 * st.b * st.b / denom;
  }
  double draw(const NodeStats& st, Rng& rng) const {
    const double prec = st.a + 1.0 / tau2;
    return st.b / prec + rng.normal() / std::sqrt(prec);
  }
};

// Inverse-gamma leaf over squared standardized residuals; the leaf value is
// the square root of the drawn variance multiplier.
struct ScaleLeaf {
  const double* u;  // e_i^2 / s2_without_this_tree
  double a0, b0;    // prior IG(a0, b0), mean 1

  void add(NodeStats& st, std::size_t i) const {
    st.a += u[i];
    ++st.n;
  }
  double score(const NodeStats& st) const {
    const double ap = a0 + 0.5 * static_cast<double>(st.n);
    return a0 * std::log(b0) - std::lgamma(a0) + std::lgamma(ap) -
           ap * std::log(b0 + 0.5 * st.a);
  }
  double draw(const NodeStats& st, Rng& rng) const {
    const double theta = rng.inverse_gamma(a0 + 0.5 * static_cast<double>(st.n),
                                           b0 + 0.5 * st.a);
    return std::sqrt(theta);
  }
};

struct TreeWorkspace {
  std::vector<NodeStats> stats;       // per node slot
  std::vector<std::int32_t> row_buf;  // rows of the node a proposal touches
  std::vector<std::int32_t> free_slots;
};

// One Metropolis-within-Gibbs update of a single tree: a structure proposal
// (birth / death / change with the configured mix) followed by a leaf draw.
// `assign` maps each row to its current leaf slot and is kept in sync.
template <class Leaf>
void update_tree(DecisionTree& tree, std::vector<std::int32_t>& assign,
                 const DesignMatrix& X, const Cutpoints& cuts, const Leaf& leaf,
                 const HbartConfig& cfg, Rng& rng, TreeWorkspace& ws) {
  const std::size_t n = X.n_rows;
  auto& nodes = tree.nodes;

  ws.stats.assign(nodes.size(), NodeStats{});
  for (std::size_t i = 0; i < n; ++i)
    leaf.add(ws.stats[static_cast<std::size_t>(assign[i])], i);

  std::vector<std::int32_t> leaves, nogs;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].split_col == -1) leaves.push_back(static_cast<std::int32_t>(k));
    else if (nodes[k].split_col >= 0 &&
             nodes[static_cast<std::size_t>(nodes[k].left)].split_col == -1 &&
             nodes[static_cast<std::size_t>(nodes[k].right)].split_col == -1)
      nogs.push_back(static_cast<std::int32_t>(k));
  }

  const auto psplit = [&](std::int32_t depth) {
    return cfg.depth_base / std::pow(1.0 + static_cast<double>(depth), cfg.depth_power);
  };
  // log of the structural prior factor a birth at depth d introduces
  const auto birth_prior = [&](std::int32_t d) {
    return std::log(psplit(d)) + 2.0 * std::log(1.0 - psplit(d + 1)) -
           std::log(1.0 - psplit(d));
  };

  enum class Move { birth, death, change };
  Move move = Move::birth;
  if (leaves.size() > 1) {
    const double u = rng.uniform();
    if (u < cfg.p_birth) move = Move::birth;
    else if (u < cfg.p_birth + cfg.p_death) move = Move::death;
    else move = Move::change;
  }

  if (move == Move::birth) {
    const auto L = leaves[rng.uniform_index(leaves.size())];
    const auto col = cuts.avail[rng.uniform_index(cuts.avail.size())];
    const auto& cl = cuts.by_col[static_cast<std::size_t>(col)];
    const double thr = cl[rng.uniform_index(cl.size())];

    ws.row_buf.clear();
    NodeStats sl, sr;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] != L) continue;
      ws.row_buf.push_back(static_cast<std::int32_t>(i));
      if (X(i, static_cast<std::size_t>(col)) <= thr) leaf.add(sl, i);
      else leaf.add(sr, i);
    }
    if (sl.n >= cfg.min_node && sr.n >= cfg.min_node) {
      const auto d = nodes[static_cast<std::size_t>(L)].depth;
      // nog count after the split: L becomes one; its parent may stop
      // being one.
      std::size_t nog_after = nogs.size() + 1;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k].split_col >= 0 && (nodes[k].left == L || nodes[k].right == L)) {
          if (std::find(nogs.begin(), nogs.end(), static_cast<std::int32_t>(k)) !=
              nogs.end())
            --nog_after;
          break;
        }
      }
      const double p_birth_here = leaves.size() == 1 ? 1.0 : cfg.p_birth;
      const double log_alpha =
          leaf.score(sl) + leaf.score(sr) - leaf.score(ws.stats[static_cast<std::size_t>(L)]) +
          birth_prior(d) + std::log(cfg.p_death) - std::log(static_cast<double>(nog_after)) -
          std::log(p_birth_here) + std::log(static_cast<double>(leaves.size()));
      if (std::log(rng.uniform()) < log_alpha) {
        auto alloc = [&]() -> std::int32_t {
          if (!ws.free_slots.empty()) {
            const auto s = ws.free_slots.back();
            ws.free_slots.pop_back();
            nodes[static_cast<std::size_t>(s)] = TreeNode{};
            return s;
          }
          nodes.push_back(TreeNode{});
          ws.stats.push_back(NodeStats{});
          return static_cast<std::int32_t>(nodes.size() - 1);
        };
        const auto li = alloc();
        const auto ri = alloc();
        auto& parent = nodes[static_cast<std::size_t>(L)];
        nodes[static_cast<std::size_t>(li)].depth = parent.depth + 1;
        nodes[static_cast<std::size_t>(ri)].depth = parent.depth + 1;
        parent.split_col = col;
        parent.threshold = thr;
        parent.left = li;
        parent.right = ri;
        parent.leaf_value = 0.0;
        for (const auto ri32 : ws.row_buf) {
          const auto i = static_cast<std::size_t>(ri32);
          assign[i] = X(i, static_cast<std::size_t>(col)) <= thr ? li : ri;
        }
        ws.stats[static_cast<std::size_t>(li)] = sl;
        ws.stats[static_cast<std::size_t>(ri)] = sr;
      }
    }
  } else if (move == Move::death) {
    const auto D = nogs[rng.uniform_index(nogs.size())];
    const auto& nd = nodes[static_cast<std::size_t>(D)];
    const NodeStats sl = ws.stats[static_cast<std::size_t>(nd.left)];
    const NodeStats sr = ws.stats[static_cast<std::size_t>(nd.right)];
    const NodeStats sm = sl + sr;
    const double p_birth_after = leaves.size() == 2 ? 1.0 : cfg.p_birth;
    const double log_alpha =
        leaf.score(sm) - leaf.score(sl) - leaf.score(sr) - birth_prior(nd.depth) +
        std::log(p_birth_after) - std::log(static_cast<double>(leaves.size() - 1)) -
        std::log(cfg.p_death) + std::log(static_cast<double>(nogs.size()));
    if (std::log(rng.uniform()) < log_alpha) {
      const auto l = nd.left, r = nd.right;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] == l || assign[i] == r) assign[i] = D;
      nodes[static_cast<std::size_t>(l)].split_col = kDead;
      nodes[static_cast<std::size_t>(r)].split_col = kDead;
      ws.free_slots.push_back(l);
      ws.free_slots.push_back(r);
      auto& dead = nodes[static_cast<std::size_t>(D)];
      dead.split_col = -1;
      dead.left = dead.right = -1;
      ws.stats[static_cast<std::size_t>(D)] = sm;
    }
  } else {  // change: redraw the rule of a no-grandchild node
    const auto D = nogs[rng.uniform_index(nogs.size())];
    const auto col = cuts.avail[rng.uniform_index(cuts.avail.size())];
    const auto& cl = cuts.by_col[static_cast<std::size_t>(col)];
    const double thr = cl[rng.uniform_index(cl.size())];
    const auto l = nodes[static_cast<std::size_t>(D)].left;
    const auto r = nodes[static_cast<std::size_t>(D)].right;

    ws.row_buf.clear();
    NodeStats sl, sr;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] != l && assign[i] != r) continue;
      ws.row_buf.push_back(static_cast<std::int32_t>(i));
      if (X(i, static_cast<std::size_t>(col)) <= thr) leaf.add(sl, i);
      else leaf.add(sr, i);
    }
    if (sl.n >= cfg.min_node && sr.n >= cfg.min_node) {
      // same depths on both sides and a symmetric rule draw: everything but
      // the likelihood cancels
      const double log_alpha = leaf.score(sl) + leaf.score(sr) -
                               leaf.score(ws.stats[static_cast<std::size_t>(l)]) -
                               leaf.score(ws.stats[static_cast<std::size_t>(r)]);
      if (std::log(rng.uniform()) < log_alpha) {
        auto& nd = nodes[static_cast<std::size_t>(D)];
        nd.split_col = col;
        nd.threshold = thr;
        for (const auto ri32 : ws.row_buf) {
          const auto i = static_cast<std::size_t>(ri32);
          assign[i] = X(i, static_cast<std::size_t>(col)) <= thr ? l : r;
        }
        ws.stats[static_cast<std::size_t>(l)] = sl;
        ws.stats[static_cast<std::size_t>(r)] = sr;
      }
    }
  }

  // Leaf-value Gibbs draw under the (possibly updated) structure.
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k].split_col == -1)
      nodes[k].leaf_value = leaf.draw(ws.stats[k], rng);
}

// Residual standard deviation of a ridge-regularized linear fit, used to
// set the base scale before any scale tree acts.
double linear_fit_sigma(const DesignMatrix& X, const std::vector<double>& ys) {
  const std::size_t n = X.n_rows, p = X.n_cols;
  if (p == 0 || n <= p + 1) return 1.0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      M(X.values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::Map<const Eigen::VectorXd> yv(ys.data(), static_cast<Eigen::Index>(n));
  Eigen::RowVectorXd mean = M.colwise().mean();
  Eigen::MatrixXd Xc = M.rowwise() - mean;
  Eigen::MatrixXd G = Xc.transpose() * Xc;
  G.diagonal().array() += 1e-8 * static_cast<double>(n);
  const Eigen::VectorXd beta = G.ldlt().solve(Xc.transpose() * yv);
  const double sse = (yv - Xc * beta).squaredNorm();
  const double dof = static_cast<double>(n - p - 1);
  return std::sqrt(std::max(sse / dof, 1e-6));
}

}  // namespace

TreeEnsembleModel fit(const DesignMatrix& X, const std::vector<double>& y,
                      const HbartConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = X.n_rows;
  if (n != y.size()) throw DataError("hbart fit: design rows and outcome length differ");
  if (n < cfg.min_rows)
    throw DataError("hbart fit: need at least " + std::to_string(cfg.min_rows) +
                    " rows, have " + std::to_string(n));
  double ymin = y[0], ymax = y[0], ysum = 0.0;
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericError("hbart fit: non-finite outcome value");
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
    ysum += v;
  }
  if (ymin == ymax) throw NumericError("hbart fit: outcome is constant");

  TreeEnsembleModel model;
  model.config = cfg;
  model.column_names = X.column_names;
  model.seed = seed;
  model.train_rows = n;
  model.retained_draws = cfg.retained();

  model.y_center = ysum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) {
    const double d = v - model.y_center;
    ss += d * d;
  }
  model.y_scale = std::sqrt(ss / static_cast<double>(n));

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = (y[i] - model.y_center) / model.y_scale;

  const Cutpoints cuts = build_cutpoints(X, cfg.max_cutpoints);
  if (cuts.avail.empty())
    throw NumericError("hbart fit: every design column is constant");

  model.scale_base = std::max(linear_fit_sigma(X, ys), 1e-3);

  double ys_min = ys[0], ys_max = ys[0];
  for (double v : ys) {
    ys_min = std::min(ys_min, v);
    ys_max = std::max(ys_max, v);
  }
  const double tau = (ys_max - ys_min) /
                     (2.0 * cfg.leaf_k * std::sqrt(static_cast<double>(cfg.mean_trees)));
  const double nu = cfg.scale_nu > 0.0 ? cfg.scale_nu
                                       : 2.0 * static_cast<double>(cfg.scale_trees);
  const double a0 = nu / 2.0 + 1.0;  // inverse-gamma shape; prior mean is 1
  const double b0 = nu / 2.0;

  const std::size_t m = cfg.mean_trees, ms = cfg.scale_trees;
  std::vector<DecisionTree> mean_trees(m), scale_trees(ms);
  for (auto& t : mean_trees) t.nodes.push_back(TreeNode{});
  for (auto& t : scale_trees) {
    t.nodes.push_back(TreeNode{});
    t.nodes[0].leaf_value = 1.0;
  }
  std::vector<std::vector<std::int32_t>> assign_mean(m, std::vector<std::int32_t>(n, 0));
  std::vector<std::vector<std::int32_t>> assign_scale(ms, std::vector<std::int32_t>(n, 0));
  std::vector<TreeWorkspace> ws_mean(m), ws_scale(ms);

  std::vector<double> resid = ys;  // y_std minus the whole mean fit
  std::vector<double> s2(n, model.scale_base * model.scale_base);
  std::vector<double> scratch_r(n), scratch_w(n), scratch_u(n), scratch_s2wo(n);

  const std::size_t R = cfg.retained();
  std::vector<double> sum_f(n, 0.0), sum_s(n, 0.0);
  model.train_summary.trace_f.resize(R);
  model.train_summary.trace_s.resize(R);

  Rng rng(seed);
  const double tau2 = tau * tau;

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t t = 0; t < m; ++t) {
      auto& tree = mean_trees[t];
      auto& assign = assign_mean[t];
      for (std::size_t i = 0; i < n; ++i) {
        scratch_r[i] =
            resid[i] + tree.nodes[static_cast<std::size_t>(assign[i])].leaf_value;
        scratch_w[i] = 1.0 / std::max(s2[i], 1e-300);
      }
      MeanLeaf leaf{scratch_r.data(), scratch_w.data(), tau2};
      update_tree(tree, assign, X, cuts, leaf, cfg, rng, ws_mean[t]);
      for (std::size_t i = 0; i < n; ++i)
        resid[i] =
            scratch_r[i] - tree.nodes[static_cast<std::size_t>(assign[i])].leaf_value;
    }

    for (std::size_t t = 0; t < ms; ++t) {
      auto& tree = scale_trees[t];
      auto& assign = assign_scale[t];
      for (std::size_t i = 0; i < n; ++i) {
        const double h = tree.nodes[static_cast<std::size_t>(assign[i])].leaf_value;
        scratch_s2wo[i] = s2[i] / (h * h);
        scratch_u[i] = resid[i] * resid[i] / scratch_s2wo[i];
      }
      ScaleLeaf leaf{scratch_u.data(), a0, b0};
      update_tree(tree, assign, X, cuts, leaf, cfg, rng, ws_scale[t]);
      for (std::size_t i = 0; i < n; ++i) {
        const double h = tree.nodes[static_cast<std::size_t>(assign[i])].leaf_value;
        s2[i] = scratch_s2wo[i] * h * h;
      }
    }

    if (it < cfg.burn_in || (it - cfg.burn_in) % cfg.thin != 0) continue;
    const std::size_t ridx = (it - cfg.burn_in) / cfg.thin;
    double mf = 0.0, msd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f_std = ys[i] - resid[i];
      const double s_std = std::sqrt(s2[i]);
      sum_f[i] += f_std;
      sum_s[i] += s_std;
      mf += f_std;
      msd += s_std;
    }
    model.train_summary.trace_f[ridx] =
        model.y_center + model.y_scale * mf / static_cast<double>(n);
    model.train_summary.trace_s[ridx] = model.y_scale * msd / static_cast<double>(n);

    if (ridx % cfg.snapshot_every == 0) {
      EnsembleDraw draw;
      draw.mean_trees.reserve(m);
      draw.scale_trees.reserve(ms);
      for (const auto& t : mean_trees) draw.mean_trees.push_back(compact_tree(t));
      for (const auto& t : scale_trees) draw.scale_trees.push_back(compact_tree(t));
      model.draws.push_back(std::move(draw));
    }
  }

  model.train_summary.f_bar.resize(n);
  model.train_summary.s_bar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    model.train_summary.f_bar[i] =
        model.y_center + model.y_scale * sum_f[i] / static_cast<double>(R);
    model.train_summary.s_bar[i] = model.y_scale * sum_s[i] / static_cast<double>(R);
  }
  return model;
}

PosteriorSummary predict(const TreeEnsembleModel& model, const DesignMatrix& X) {
  if (X.column_names.size() != model.column_names.size())
    throw DataError("hbart predict: design has " + std::to_string(X.column_names.size()) +
                    " columns, model was trained on " +
                    std::to_string(model.column_names.size()));
  for (std::size_t j = 0; j < X.column_names.size(); ++j)
    if (X.column_names[j] != model.column_names[j])
      throw DataError("hbart predict: column mismatch at position " + std::to_string(j) +
                      ": '" + X.column_names[j] + "' vs '" + model.column_names[j] + "'");
  if (model.draws.empty()) throw ConfigError("hbart predict: model holds no draws");

  const std::size_t n = X.n_rows;
  const std::size_t D = model.draws.size();
  PosteriorSummary out;
  out.f_bar.assign(n, 0.0);
  out.s_bar.assign(n, 0.0);
  out.trace_f.resize(D);
  out.trace_s.resize(D);

  for (std::size_t d = 0; d < D; ++d) {
    const EnsembleDraw& draw = model.draws[d];
    double mf = 0.0, msd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = X.row(i);
      double f_std = 0.0;
      for (const auto& t : draw.mean_trees) f_std += t.nodes[t.route(row)].leaf_value;
      double s_std = model.scale_base;
      for (const auto& t : draw.scale_trees) s_std *= t.nodes[t.route(row)].leaf_value;
      const double f_m = model.y_center + model.y_scale * f_std;
      const double s_m = model.y_scale * s_std;
      out.f_bar[i] += f_m;
      out.s_bar[i] += s_m;
      mf += f_m;
      msd += s_m;
    }
    out.trace_f[d] = mf / static_cast<double>(n);
    out.trace_s[d] = msd / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.f_bar[i] /= static_cast<double>(D);
    out.s_bar[i] /= static_cast<double>(D);
  }
  return out;
}

RSquared r_squared(const std::vector<double>& f_bar, const std::vector<double>& y,
                   std::size_t p) {
  if (f_bar.size() != y.size()) throw DataError("r_squared: length mismatch");
  const std::size_t n = y.size();
  if (n <= p + 1)
    throw DataError("r_squared: need n > p + 1, have n=" + std::to_string(n) +
                    ", p=" + std::to_string(p));
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sse += (y[i] - f_bar[i]) * (y[i] - f_bar[i]);
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  if (!(sst > 0.0)) throw NumericError("r_squared: outcome has zero variance");
  RSquared rs;
  rs.r2 = 1.0 - sse / sst;
  rs.adjusted = 1.0 - (1.0 - rs.r2) * static_cast<double>(n - 1) /
                          static_cast<double>(n - p - 1);
  return rs;
}

namespace {

void save_tree(std::ostream& out, const DecisionTree& t) {
  out << t.nodes.size() << '\n';
  for (const auto& nd : t.nodes)
    out << nd.split_col << ' ' << format_double(nd.threshold) << ' ' << nd.left << ' '
        << nd.right << ' ' << nd.depth << ' ' << format_double(nd.leaf_value) << '\n';
}

DecisionTree load_tree(std::istream& in, const std::string& source_name) {
  std::size_t k = 0;
  if (!(in >> k) || k == 0)
    throw DataError(source_name + ": bad model file: bad tree node count");
  DecisionTree t;
  t.nodes.resize(k);
  for (auto& nd : t.nodes) {
    if (!(in >> nd.split_col >> nd.threshold >> nd.left >> nd.right >> nd.depth >>
          nd.leaf_value))
      throw DataError(source_name + ": bad model file: truncated tree");
  }
  return t;
}

}  // namespace

void save_model(std::ostream& out, const TreeEnsembleModel& model,
                const std::string& manifest_hash) {
  const auto& c = model.config;
  out << "SENTRISK_HBART 1\n";
  out << "manifest " << (manifest_hash.empty() ? "-" : manifest_hash) << '\n';
  out << "seed " << model.seed << '\n';
  out << "transform " << format_double(model.y_center) << ' ' << format_double(model.y_scale)
      << ' ' << format_double(model.scale_base) << '\n';
  out << "config " << c.mean_trees << ' ' << c.scale_trees << ' ' << c.iterations << ' '
      << c.burn_in << ' ' << c.thin << ' ' << c.snapshot_every << ' ' << c.min_node << ' '
      << c.max_cutpoints << ' ' << c.min_rows << '\n';
  out << "priors " << format_double(c.p_birth) << ' ' << format_double(c.p_death) << ' '
      << format_double(c.p_change) << ' ' << format_double(c.depth_base) << ' '
      << format_double(c.depth_power) << ' ' << format_double(c.leaf_k) << ' '
      << format_double(c.scale_nu) << '\n';
  out << "rows " << model.train_rows << " retained " << model.retained_draws << '\n';
  out << "columns " << model.column_names.size() << '\n';
  for (const auto& name : model.column_names) out << name << '\n';
  out << "draws " << model.draws.size() << '\n';
  for (const auto& d : model.draws) {
    for (const auto& t : d.mean_trees) save_tree(out, t);
    for (const auto& t : d.scale_trees) save_tree(out, t);
  }
}

TreeEnsembleModel load_model(std::istream& in, const std::string& source_name) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError(source_name + ": bad model file: " + why);
  };
  std::string word;
  int ver = 0;
  if (!(in >> word >> ver) || word != "SENTRISK_HBART" || ver != 1)
    throw fail("expected SENTRISK_HBART 1 header");
  TreeEnsembleModel model;
  std::string manifest;
  if (!(in >> word >> manifest) || word != "manifest") throw fail("missing manifest");
  if (!(in >> word >> model.seed) || word != "seed") throw fail("missing seed");
  if (!(in >> word >> model.y_center >> model.y_scale >> model.scale_base) ||
      word != "transform")
    throw fail("missing transform");
  auto& c = model.config;
  if (!(in >> word >> c.mean_trees >> c.scale_trees >> c.iterations >> c.burn_in >> c.thin >>
        c.snapshot_every >> c.min_node >> c.max_cutpoints >> c.min_rows) ||
      word != "config")
    throw fail("missing config");
  if (!(in >> word >> c.p_birth >> c.p_death >> c.p_change >> c.depth_base >> c.depth_power >>
        c.leaf_k >> c.scale_nu) ||
      word != "priors")
    throw fail("missing priors");
  std::size_t ncols = 0, ndraws = 0;
  if (!(in >> word >> model.train_rows) || word != "rows") throw fail("missing rows");
  if (!(in >> word >> model.retained_draws) || word != "retained") throw fail("missing retained");
  if (!(in >> word >> ncols) || word != "columns") throw fail("missing columns");
  in.ignore();
  model.column_names.reserve(ncols);
  std::string line;
  for (std::size_t i = 0; i < ncols; ++i) {
    if (!std::getline(in, line)) throw fail("truncated column list");
    model.column_names.push_back(line);
  }
  if (!(in >> word >> ndraws) || word != "draws") throw fail("missing draws");
  model.draws.resize(ndraws);
  for (auto& d : model.draws) {
    d.mean_trees.reserve(c.mean_trees);
    d.scale_trees.reserve(c.scale_trees);
    for (std::size_t t = 0; t < c.mean_trees; ++t)
      d.mean_trees.push_back(load_tree(in, source_name));
    for (std::size_t t = 0; t < c.scale_trees; ++t)
      d.scale_trees.push_back(load_tree(in, source_name));
  }
  return model;
}

}  // namespace sentrisk
