#include "sentrisk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "sentrisk/errors.hpp"

namespace sentrisk {

CsvReader::CsvReader(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {}

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  int c = in_.get();
  // Skip blank lines and comment records between records.
  while (c == '\n' || c == '\r' || c == '#') {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in_.get();
      if (c == EOF) return false;
    }
    c = in_.get();
  }
  if (c == EOF) return false;

  ++record_;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = (c == '"');
  if (quoted_field) {
    in_quotes = true;
    c = in_.get();
  }
  for (;;) {
    if (c == EOF) {
      if (in_quotes)
        throw DataError(source_ + ": unterminated quoted field in record " +
                        std::to_string(record_));
      fields.push_back(std::move(field));
      return true;
    }
    if (in_quotes) {
      if (c == '"') {
        const int peek = in_.get();
        if (peek == '"') {
          field.push_back('"');
        } else {
          in_quotes = false;
          if (peek == EOF) {
            fields.push_back(std::move(field));
            return true;
          }
          in_.unget();
        }
      } else {
        field.push_back(static_cast<char>(c));
      }
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      c = in_.get();
      if (c == '"') {
        in_quotes = true;
        c = in_.get();
      }
      continue;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && in_.peek() == '\n') in_.get();
      fields.push_back(std::move(field));
      return true;
    } else if (c == '"' && field.empty() && !quoted_field) {
      // Quote opening after field start was already handled; a quote at
      // byte 0 of an unquoted field begins quoting.
      in_quotes = true;
    } else {
      field.push_back(static_cast<char>(c));
    }
    c = in_.get();
  }
}

std::string csv_escape(const std::string& field) {
  bool needs = false;
  for (char ch : field) {
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
      needs = true;
      break;
    }
  }
  if (!needs && !field.empty() && field.front() == '#') needs = true;
  if (!needs) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  // Shortest representation that round-trips exactly, fixed form preferred.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size()) return std::nullopt;
  return v;
}

}  // namespace sentrisk
