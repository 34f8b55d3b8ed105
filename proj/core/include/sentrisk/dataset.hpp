#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sentrisk/schema.hpp"

namespace sentrisk {

// Sentences are measured in months and capped here during preprocessing.
inline constexpr double kSentenceCapMonths = 540.0;

enum class SplitPart : std::int8_t { unassigned = 0, train = 1, test = 2 };

struct Column {
  ColumnSpec spec;
  // Numeric and enhancement-points columns use `num` (NaN = missing);
  // categorical columns use `code` into `levels` (-1 = missing).
  std::vector<double> num;
  std::vector<std::int32_t> code;
  std::vector<std::string> levels;  // sorted, unique

  bool is_categorical() const { return spec.kind == ColumnKind::categorical; }
  // Cell as display text ("" for missing).
  std::string cell_text(std::size_t row) const;
};

struct Dataset {
  std::vector<Column> columns;
  std::vector<std::int64_t> row_ids;   // stable keys, survive filtering
  std::vector<SplitPart> split;        // empty until split() runs
  bool preprocessed = false;
  // Filled by preprocess(): rows with no missing numeric cells among the
  // columns of each role.
  std::vector<std::uint8_t> relevant_complete;
  std::vector<std::uint8_t> irrelevant_complete;

  std::size_t n_rows() const { return row_ids.size(); }
  std::size_t outcome_index() const;
  const Column& outcome_column() const { return columns[outcome_index()]; }
  const Column* find_column(const std::string& name) const;
  std::vector<double> outcome_months() const { return outcome_column().num; }
};

// Reads a CSV with a header row that must contain every schema column
// (extra file columns are ignored). Unparseable numeric cells and empty or
// NA cells are recorded as missing. Categorical level codes are assigned
// against the sorted set of observed level strings.
Dataset load_csv(const std::string& path, const Schema& schema);
Dataset load_csv(std::istream& in, const Schema& schema, const std::string& source_name);

struct PreprocessLog {
  std::size_t rows_in = 0;
  std::size_t dropped_missing_outcome = 0;
  std::size_t capped_outcome = 0;
  std::size_t categorical_to_unknown = 0;  // cells
  std::size_t enhancement_to_zero = 0;     // cells
  std::size_t incomplete_relevant = 0;     // rows
  std::size_t incomplete_irrelevant = 0;   // rows
};

// Cleaning pass: drops rows with a missing outcome, clamps the outcome to
// [0, kSentenceCapMonths], maps missing categorical cells to an explicit
// "unknown" level, zero-fills missing enhancement-points cells, and marks
// role-completeness for the remaining numeric columns. Idempotent.
Dataset preprocess(const Dataset& ds, PreprocessLog* log = nullptr);

// Seeded uniform shuffle split; train gets floor(train_fraction * n) rows.
// Every row is assigned to exactly one part.
Dataset split(const Dataset& ds, double train_fraction, std::uint64_t seed);

}  // namespace sentrisk
