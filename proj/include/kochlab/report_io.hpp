#pragma once

#include <string>
#include <vector>

namespace kochlab {

// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  // Index of a header column, or -1.
  int column(const std::string& name) const;
};

// RFC 4180: CRLF line ends, fields quoted when they hold a comma, quote or line break.
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace kochlab
