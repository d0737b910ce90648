#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "qrep/errors.hpp"

namespace qrep::io {

enum class Format { csv, tsv, markdown };

Format parse_format(const std::string& name);

struct ParsedTable {
  std::vector<std::string> header;  // empty when the file had no header row
  std::vector<std::vector<double>> rows;
  std::size_t columns() const { return header.empty() ? (rows.empty() ? 0 : rows[0].size()) : header.size(); }
};

// Whitespace- or comma-delimited numeric table; a non-numeric first row is
// treated as the header. Errors carry the origin and 1-based line number.
ParsedTable read_delimited(std::istream& in, const std::string& origin);
ParsedTable read_delimited_file(const std::string& path);

// Column by (case-insensitive) header name or 0-based numeric index.
Eigen::Index resolve_column(const ParsedTable& t, const std::string& selector, const char* what);

// 17 significant digits for machine formats, 4 decimals for markdown.
std::string format_value(double v, Format f);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_table(std::ostream& out, const Table& t, Format f);

}  // namespace qrep::io
