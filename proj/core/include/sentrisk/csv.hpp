#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sentrisk {

// Streaming RFC-4180 reader: comma-separated, double-quote quoting with
// doubled embedded quotes, CR/LF/CRLF record ends, newlines allowed inside
// quoted fields. Extension: a record whose first unquoted byte is '#' is a
// comment and is skipped (used for the leading #manifest= line in
// artifacts).
class CsvReader {
 public:
  explicit CsvReader(std::istream& in, std::string source_name = "<stream>");

  // Reads the next record into `fields`. Returns false at end of input.
  // Malformed quoting throws DataError with the record number.
  bool next(std::vector<std::string>& fields);

  const std::string& source() const { return source_; }
  std::size_t record_number() const { return record_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t record_ = 0;
};

// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest round-trip decimal text for a double ("%.17g" tidied by trying
// shorter precisions first). Used everywhere a number lands in an artifact
// so outputs are byte-stable.
std::string format_double(double v);

// Fixed precision, e.g. format_double(x, 4) -> "%.4f"-style text.
std::string format_double(double v, int decimals);

// Full-string strtod parse; empty/invalid -> nullopt.
std::optional<double> parse_double(const std::string& s);

}  // namespace sentrisk
