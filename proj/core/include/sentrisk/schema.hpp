#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sentrisk {

enum class ColumnKind { categorical, numeric, enhancement_points };
enum class ColumnRole { outcome, relevant, irrelevant, ignored };

const char* to_string(ColumnKind k);
const char* to_string(ColumnRole r);
ColumnKind column_kind_from_string(const std::string& s);
ColumnRole column_role_from_string(const std::string& s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::ignored;
};

// Column declarations for one dataset. Exactly one column carries the
// outcome role; names are unique.
struct Schema {
  std::vector<ColumnSpec> columns;

  void validate() const;  // throws ConfigError on violations
  const ColumnSpec* find(const std::string& name) const;
  std::size_t outcome_index() const;
};

// Text form, one declaration per line: `<name> <kind> <role>`, where kind is
// categorical|numeric|enhancement-points and role is
// outcome|relevant|irrelevant|ignored. Blank lines and `#` comments are
// skipped. enhancement-points columns are stored as numeric counts.
Schema parse_schema(std::istream& in, const std::string& source_name);
Schema load_schema(const std::string& path);
void write_schema(std::ostream& out, const Schema& schema);

}  // namespace sentrisk
