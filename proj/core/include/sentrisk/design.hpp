#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentrisk/dataset.hpp"

namespace sentrisk {

// Dense row-major numeric matrix with named columns. Each column carries
// the factor ("group") it came from so effects can be reported per factor
// after one-hot expansion and interactions.
struct DesignMatrix {
  std::vector<double> values;  // row-major, n_rows x n_cols
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::string> column_names;   // e.g. "MONRACE=2", "AGE"
  std::vector<std::string> column_groups;  // e.g. "MONRACE",  "AGE"
  std::vector<std::int64_t> row_ids;
  std::vector<SplitPart> split;

  double operator()(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * n_cols; }
  std::size_t column_index(const std::string& name) const;  // throws if absent
};

struct Interaction {
  std::string left, right;  // factor names from the schema
};

// Expands the columns of one role into a numeric design over the rows whose
// role mask is complete. Categorical factors one-hot expand over the full
// level set (level order = sorted level strings); numeric factors map to a
// single column; interactions multiply the expanded blocks of two factors
// pairwise. With standardize=true numeric columns are centered/scaled over
// the included rows (zero variance => error). Requires a preprocessed
// dataset.
DesignMatrix build_design(const Dataset& ds, ColumnRole role,
                          const std::vector<Interaction>& interactions = {},
                          bool standardize = false);

// Rows belonging to one split part.
DesignMatrix filter_rows(const DesignMatrix& X, SplitPart part);

// Drops the named columns (exact column names or whole group names).
DesignMatrix drop_columns(const DesignMatrix& X, const std::vector<std::string>& names);

// Drops columns constant over the given rows (all rows when mask empty);
// appends their names to `dropped` when provided.
DesignMatrix drop_constant_columns(const DesignMatrix& X, std::vector<std::string>* dropped,
                                   const std::vector<std::uint8_t>& row_mask = {});

// Outcome values aligned with X.row_ids (dataset rows looked up by id).
std::vector<double> gather_outcome(const Dataset& ds, const DesignMatrix& X);

}  // namespace sentrisk
