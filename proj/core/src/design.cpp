#include "sentrisk/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "sentrisk/errors.hpp"

namespace sentrisk {

namespace {

// Expanded block of one factor: column names plus a value getter.
struct Block {
  std::vector<std::string> names;
  // value of expanded column j at dataset row r
  std::function<double(std::size_t r, std::size_t j)> value;
};

Block expand_factor(const Column& col) {
  Block b;
  if (col.is_categorical()) {
    for (const auto& lv : col.levels) b.names.push_back(col.spec.name + "=" + lv);
    const auto* codes = &col.code;
    b.value = [codes](std::size_t r, std::size_t j) {
      return (*codes)[r] == static_cast<std::int32_t>(j) ? 1.0 : 0.0;
    };
  } else {
    b.names.push_back(col.spec.name);
    const auto* num = &col.num;
    b.value = [num](std::size_t r, std::size_t) { return (*num)[r]; };
  }
  return b;
}

}  // namespace

std::size_t DesignMatrix::column_index(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end())
    throw DataError("design has no column named '" + name + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

DesignMatrix build_design(const Dataset& ds, ColumnRole role,
                          const std::vector<Interaction>& interactions, bool standardize) {
  if (!ds.preprocessed)
    throw ConfigError("build_design requires a preprocessed dataset");
  if (role != ColumnRole::relevant && role != ColumnRole::irrelevant)
    throw ConfigError("build_design expects the relevant or irrelevant role");

  const auto& mask =
      role == ColumnRole::relevant ? ds.relevant_complete : ds.irrelevant_complete;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r)
    if (mask.empty() || mask[r]) rows.push_back(r);

  // Factors of this role, in schema order.
  std::vector<const Column*> factors;
  std::unordered_map<std::string, const Column*> by_name;
  for (const auto& col : ds.columns) {
    if (col.spec.role == role) factors.push_back(&col);
    by_name[col.spec.name] = &col;
  }
  for (const auto& ia : interactions) {
    for (const std::string* nm : {&ia.left, &ia.right}) {
      const auto it = by_name.find(*nm);
      if (it == by_name.end() || it->second->spec.role != role)
        throw ConfigError("interaction references unknown factor '" + *nm +
                          "' for role " + to_string(role));
    }
  }

  DesignMatrix X;
  X.n_rows = rows.size();
  X.row_ids.reserve(rows.size());
  for (std::size_t r : rows) X.row_ids.push_back(ds.row_ids[r]);
  if (!ds.split.empty()) {
    X.split.reserve(rows.size());
    for (std::size_t r : rows) X.split.push_back(ds.split[r]);
  }

  struct PlannedColumn {
    std::string name, group;
    const Block* a;
    std::size_t aj;
    const Block* b;   // null unless interaction
    std::size_t bj = 0;
  };
  std::vector<Block> blocks;
  blocks.reserve(factors.size());
  std::unordered_map<std::string, std::size_t> block_of;
  for (const auto* col : factors) {
    block_of[col->spec.name] = blocks.size();
    blocks.push_back(expand_factor(*col));
  }
  std::vector<PlannedColumn> plan;
  for (std::size_t f = 0; f < factors.size(); ++f)
    for (std::size_t j = 0; j < blocks[f].names.size(); ++j)
      plan.push_back({blocks[f].names[j], factors[f]->spec.name, &blocks[f], j, nullptr, 0});
  for (const auto& ia : interactions) {
    const Block& A = blocks[block_of.at(ia.left)];
    const Block& B = blocks[block_of.at(ia.right)];
    const std::string group = ia.left + "*" + ia.right;
    for (std::size_t ja = 0; ja < A.names.size(); ++ja)
      for (std::size_t jb = 0; jb < B.names.size(); ++jb)
        plan.push_back({A.names[ja] + "*" + B.names[jb], group, &A, ja, &B, jb});
  }

  X.n_cols = plan.size();
  X.column_names.reserve(plan.size());
  X.column_groups.reserve(plan.size());
  for (const auto& p : plan) {
    X.column_names.push_back(p.name);
    X.column_groups.push_back(p.group);
  }
  X.values.resize(X.n_rows * X.n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    double* out = X.values.data() + i * X.n_cols;
    for (std::size_t c = 0; c < plan.size(); ++c) {
      const auto& p = plan[c];
      double v = p.a->value(r, p.aj);
      if (p.b) v *= p.b->value(r, p.bj);
      out[c] = v;
    }
  }

  if (standardize) {
    for (std::size_t c = 0; c < X.n_cols; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < X.n_rows; ++i) mean += X(i, c);
      mean /= static_cast<double>(X.n_rows ? X.n_rows : 1);
      double ss = 0.0;
      for (std::size_t i = 0; i < X.n_rows; ++i) {
        const double d = X(i, c) - mean;
        ss += d * d;
      }
      const double sd =
          std::sqrt(ss / static_cast<double>(X.n_rows > 1 ? X.n_rows - 1 : 1));
      if (sd == 0.0)
        throw NumericError("zero-variance design column '" + X.column_names[c] + "'");
      for (std::size_t i = 0; i < X.n_rows; ++i)
        X.at(i, c) = (X(i, c) - mean) / sd;
    }
  }
  return X;
}

DesignMatrix filter_rows(const DesignMatrix& X, SplitPart part) {
  if (X.split.empty()) throw ConfigError("design has no split assignment");
  DesignMatrix out;
  out.n_cols = X.n_cols;
  out.column_names = X.column_names;
  out.column_groups = X.column_groups;
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    if (X.split[r] != part) continue;
    out.row_ids.push_back(X.row_ids[r]);
    out.split.push_back(X.split[r]);
    const double* src = X.row(r);
    out.values.insert(out.values.end(), src, src + X.n_cols);
  }
  out.n_rows = out.row_ids.size();
  return out;
}

DesignMatrix drop_columns(const DesignMatrix& X, const std::vector<std::string>& names) {
  std::unordered_set<std::string> kill(names.begin(), names.end());
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < X.n_cols; ++c)
    if (!kill.count(X.column_names[c]) && !kill.count(X.column_groups[c])) keep.push_back(c);

  DesignMatrix out;
  out.n_rows = X.n_rows;
  out.n_cols = keep.size();
  out.row_ids = X.row_ids;
  out.split = X.split;
  for (std::size_t c : keep) {
    out.column_names.push_back(X.column_names[c]);
    out.column_groups.push_back(X.column_groups[c]);
  }
  out.values.resize(out.n_rows * out.n_cols);
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t k = 0; k < keep.size(); ++k)
      out.at(r, k) = X(r, keep[k]);
  return out;
}

DesignMatrix drop_constant_columns(const DesignMatrix& X, std::vector<std::string>* dropped,
                                   const std::vector<std::uint8_t>& row_mask) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < X.n_cols; ++c) {
    bool constant = true;
    bool have_first = false;
    double first = 0.0;
    for (std::size_t r = 0; r < X.n_rows; ++r) {
      if (!row_mask.empty() && !row_mask[r]) continue;
      if (!have_first) {
        first = X(r, c);
        have_first = true;
      } else if (X(r, c) != first) {
        constant = false;
        break;
      }
    }
    if (constant) names.push_back(X.column_names[c]);
  }
  if (dropped)
    dropped->insert(dropped->end(), names.begin(), names.end());
  if (names.empty()) return X;
  return drop_columns(X, names);
}

std::vector<double> gather_outcome(const Dataset& ds, const DesignMatrix& X) {
  std::unordered_map<std::int64_t, std::size_t> pos;
  pos.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) pos[ds.row_ids[r]] = r;
  const auto& y = ds.outcome_column().num;
  std::vector<double> out;
  out.reserve(X.row_ids.size());
  for (const auto id : X.row_ids) {
    const auto it = pos.find(id);
    if (it == pos.end())
      throw DataError("design row id " + std::to_string(id) + " not present in dataset");
    out.push_back(y[it->second]);
  }
  return out;
}

}  // namespace sentrisk
