#include "sentrisk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "sentrisk/csv.hpp"
#include "sentrisk/errors.hpp"
#include "sentrisk/rng.hpp"

namespace sentrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "N/A" || s == "na" || s == ".";
}

// Re-sorts a categorical column's level set and remaps codes.
void canonicalize_levels(Column& col) {
  std::vector<std::string> sorted = col.levels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<std::string, std::int32_t> index;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    index[sorted[i]] = static_cast<std::int32_t>(i);
  for (auto& c : col.code)
    if (c >= 0) c = index.at(col.levels[static_cast<std::size_t>(c)]);
  col.levels = std::move(sorted);
}

}  // namespace

std::string Column::cell_text(std::size_t row) const {
  if (is_categorical()) {
    const auto c = code[row];
    return c < 0 ? std::string() : levels[static_cast<std::size_t>(c)];
  }
  return std::isnan(num[row]) ? std::string() : format_double(num[row]);
}

std::size_t Dataset::outcome_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].spec.role == ColumnRole::outcome) return i;
  throw ConfigError("dataset has no outcome column");
}

const Column* Dataset::find_column(const std::string& name) const {
  for (const auto& col : columns)
    if (col.spec.name == name) return &col;
  return nullptr;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return load_csv(in, schema, path);
}

Dataset load_csv(std::istream& in, const Schema& schema, const std::string& source_name) {
  schema.validate();
  CsvReader reader(in, source_name);
  std::vector<std::string> header;
  if (!reader.next(header)) throw DataError(source_name + ": empty CSV file");

  // Map each schema column onto its file position.
  std::vector<std::size_t> file_pos(schema.columns.size());
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    const auto it = std::find(header.begin(), header.end(), schema.columns[i].name);
    if (it == header.end())
      throw DataError(source_name + ": schema error: column '" + schema.columns[i].name +
                      "' not found in CSV header");
    file_pos[i] = static_cast<std::size_t>(it - header.begin());
  }

  Dataset ds;
  ds.columns.resize(schema.columns.size());
  std::vector<std::map<std::string, std::int32_t>> level_index(schema.columns.size());
  for (std::size_t i = 0; i < schema.columns.size(); ++i)
    ds.columns[i].spec = schema.columns[i];

  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() < header.size())
      throw DataError(source_name + ": record " + std::to_string(reader.record_number()) +
                      " has " + std::to_string(row.size()) + " fields, header has " +
                      std::to_string(header.size()));
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      Column& col = ds.columns[i];
      const std::string& cell = row[file_pos[i]];
      if (col.is_categorical()) {
        if (is_missing_token(cell)) {
          col.code.push_back(-1);
        } else {
          auto [it, inserted] =
              level_index[i].try_emplace(cell, static_cast<std::int32_t>(col.levels.size()));
          if (inserted) col.levels.push_back(cell);
          col.code.push_back(it->second);
        }
      } else {
        if (is_missing_token(cell)) {
          col.num.push_back(kNaN);
        } else if (auto v = parse_double(cell)) {
          col.num.push_back(*v);
        } else {
          col.num.push_back(kNaN);  // unparseable numeric cell => missing
        }
      }
    }
    ds.row_ids.push_back(static_cast<std::int64_t>(ds.row_ids.size()));
  }

  for (auto& col : ds.columns)
    if (col.is_categorical()) canonicalize_levels(col);
  return ds;
}

Dataset preprocess(const Dataset& input, PreprocessLog* log) {
  PreprocessLog local;
  PreprocessLog& lg = log ? *log : local;
  lg = PreprocessLog{};
  lg.rows_in = input.n_rows();

  const std::size_t out_idx = input.outcome_index();
  const std::size_t n = input.n_rows();

  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (std::isnan(input.columns[out_idx].num[r]))
      ++lg.dropped_missing_outcome;
    else
      keep.push_back(r);
  }

  Dataset ds;
  ds.columns.resize(input.columns.size());
  ds.row_ids.reserve(keep.size());
  for (std::size_t r : keep) ds.row_ids.push_back(input.row_ids[r]);
  if (!input.split.empty()) {
    ds.split.reserve(keep.size());
    for (std::size_t r : keep) ds.split.push_back(input.split[r]);
  }

  for (std::size_t i = 0; i < input.columns.size(); ++i) {
    const Column& src = input.columns[i];
    Column& dst = ds.columns[i];
    dst.spec = src.spec;
    if (src.is_categorical()) {
      dst.levels = src.levels;
      dst.code.reserve(keep.size());
      std::int32_t unknown_code = -1;
      for (std::size_t li = 0; li < dst.levels.size(); ++li)
        if (dst.levels[li] == "unknown") unknown_code = static_cast<std::int32_t>(li);
      for (std::size_t r : keep) {
        std::int32_t c = src.code[r];
        if (c < 0) {
          if (unknown_code < 0) {
            dst.levels.push_back("unknown");
            unknown_code = static_cast<std::int32_t>(dst.levels.size() - 1);
          }
          c = unknown_code;
          ++lg.categorical_to_unknown;
        }
        dst.code.push_back(c);
      }
      canonicalize_levels(dst);
    } else {
      dst.num.reserve(keep.size());
      const bool is_outcome = (i == out_idx);
      const bool is_enh = src.spec.kind == ColumnKind::enhancement_points;
      for (std::size_t r : keep) {
        double v = src.num[r];
        if (is_outcome) {
          if (v > kSentenceCapMonths) {
            v = kSentenceCapMonths;
            ++lg.capped_outcome;
          } else if (v < 0.0) {
            v = 0.0;
            ++lg.capped_outcome;
          }
        } else if (is_enh && std::isnan(v)) {
          v = 0.0;
          ++lg.enhancement_to_zero;
        }
        dst.num.push_back(v);
      }
    }
  }

  // Role completeness over the surviving numeric cells.
  const std::size_t m = ds.n_rows();
  ds.relevant_complete.assign(m, 1);
  ds.irrelevant_complete.assign(m, 1);
  for (const auto& col : ds.columns) {
    if (col.is_categorical()) continue;
    std::vector<std::uint8_t>* mask = nullptr;
    if (col.spec.role == ColumnRole::relevant) mask = &ds.relevant_complete;
    else if (col.spec.role == ColumnRole::irrelevant) mask = &ds.irrelevant_complete;
    else continue;
    for (std::size_t r = 0; r < m; ++r)
      if (std::isnan(col.num[r])) (*mask)[r] = 0;
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (!ds.relevant_complete[r]) ++lg.incomplete_relevant;
    if (!ds.irrelevant_complete[r]) ++lg.incomplete_irrelevant;
  }

  ds.preprocessed = true;
  return ds;
}

Dataset split(const Dataset& input, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  const std::size_t n = input.n_rows();
  if (n < 2) throw DataError("need at least 2 rows to split, have " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const auto train_n = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  Dataset ds = input;
  ds.split.assign(n, SplitPart::test);
  for (std::size_t i = 0; i < train_n; ++i) ds.split[order[i]] = SplitPart::train;
  return ds;
}

}  // namespace sentrisk
