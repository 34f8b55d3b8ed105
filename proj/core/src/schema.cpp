#include "sentrisk/schema.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sentrisk/errors.hpp"

namespace sentrisk {

const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::enhancement_points: return "enhancement-points";
  }
  return "?";
}

const char* to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::outcome: return "outcome";
    case ColumnRole::relevant: return "relevant";
    case ColumnRole::irrelevant: return "irrelevant";
    case ColumnRole::ignored: return "ignored";
  }
  return "?";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "enhancement-points") return ColumnKind::enhancement_points;
  throw ConfigError("unknown column kind '" + s + "'");
}

ColumnRole column_role_from_string(const std::string& s) {
  if (s == "outcome") return ColumnRole::outcome;
  if (s == "relevant") return ColumnRole::relevant;
  if (s == "irrelevant") return ColumnRole::irrelevant;
  if (s == "ignored") return ColumnRole::ignored;
  throw ConfigError("unknown column role '" + s + "'");
}

void Schema::validate() const {
  if (columns.empty()) throw ConfigError("schema declares no columns");
  std::unordered_set<std::string> seen;
  std::size_t outcomes = 0;
  for (const auto& col : columns) {
    if (col.name.empty()) throw ConfigError("schema column with empty name");
    if (!seen.insert(col.name).second)
      throw ConfigError("duplicate schema column '" + col.name + "'");
    if (col.role == ColumnRole::outcome) {
      ++outcomes;
      if (col.kind == ColumnKind::categorical)
        throw ConfigError("outcome column '" + col.name + "' must be numeric");
    }
  }
  if (outcomes != 1)
    throw ConfigError("schema must declare exactly one outcome column, found " +
                      std::to_string(outcomes));
}

const ColumnSpec* Schema::find(const std::string& name) const {
  for (const auto& col : columns)
    if (col.name == name) return &col;
  return nullptr;
}

std::size_t Schema::outcome_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].role == ColumnRole::outcome) return i;
  throw ConfigError("schema has no outcome column");
}

Schema parse_schema(std::istream& in, const std::string& source_name) {
  Schema schema;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name, kind, role, extra;
    if (!(ls >> name)) continue;  // blank
    if (!(ls >> kind >> role) || (ls >> extra))
      throw ConfigError(source_name + ":" + std::to_string(lineno) +
                        ": expected `<name> <kind> <role>`");
    ColumnSpec spec;
    spec.name = name;
    try {
      spec.kind = column_kind_from_string(kind);
      spec.role = column_role_from_string(role);
    } catch (const ConfigError& e) {
      throw ConfigError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
    schema.columns.push_back(std::move(spec));
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file '" + path + "'");
  return parse_schema(in, path);
}

void write_schema(std::ostream& out, const Schema& schema) {
  for (const auto& col : schema.columns)
    out << col.name << ' ' << to_string(col.kind) << ' ' << to_string(col.role) << '\n';
}

}  // namespace sentrisk
