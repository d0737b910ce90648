#include "qrep/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qrep::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  if (line.find(',') != std::string::npos) {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
  } else {
    std::stringstream ss(line);
    std::string field;
    while (ss >> field) out.push_back(field);
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Format parse_format(const std::string& name) {
  const std::string n = lower(name);
  if (n == "csv") return Format::csv;
  if (n == "tsv") return Format::tsv;
  if (n == "markdown" || n == "md") return Format::markdown;
  raise(errc::invalid_argument, "unknown output format '" + name + "' (csv, tsv, markdown)");
}

ParsedTable read_delimited(std::istream& in, const std::string& origin) {
  ParsedTable t;
  std::string line;
  std::size_t lineno = 0;
  bool saw_first = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto fields = split_line(stripped);
    if (fields.empty()) continue;
    if (!saw_first) {
      saw_first = true;
      width = fields.size();
      bool numeric = true;
      std::vector<double> row(fields.size());
      for (std::size_t c = 0; c < fields.size() && numeric; ++c) {
        numeric = parse_double(fields[c], row[c]);
      }
      if (numeric) {
        t.rows.push_back(std::move(row));
      } else {
        t.header = std::move(fields);
      }
      continue;
    }
    if (fields.size() != width) {
      raise(errc::parse_error, origin + " line " + std::to_string(lineno) + ": expected " +
                                   std::to_string(width) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], row[c])) {
        raise(errc::parse_error, origin + " line " + std::to_string(lineno) + ": field " +
                                     std::to_string(c + 1) + " ('" + fields[c] +
                                     "') is not numeric");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) raise(errc::empty_sample, origin + ": no data rows");
  return t;
}

ParsedTable read_delimited_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::parse_error, "cannot open '" + path + "'");
  return read_delimited(in, path);
}

Eigen::Index resolve_column(const ParsedTable& t, const std::string& selector, const char* what) {
  const auto ncol = static_cast<Eigen::Index>(t.columns());
  if (!t.header.empty()) {
    const std::string want = lower(selector);
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (lower(t.header[c]) == want) return static_cast<Eigen::Index>(c);
    }
  }
  double v = 0.0;
  if (parse_double(selector, v) && v == std::floor(v) && v >= 0.0 && v < static_cast<double>(ncol)) {
    return static_cast<Eigen::Index>(v);
  }
  raise(errc::invalid_argument, std::string(what) + " column '" + selector +
                                    "' not found (use a header name or 0-based index)");
}

std::string format_value(double v, Format f) {
  char buf[64];
  if (f == Format::markdown) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

void write_table(std::ostream& out, const Table& t, Format f) {
  const char* sep = f == Format::tsv ? "\t" : ",";
  if (f == Format::markdown) {
    out << "|";
    for (const auto& c : t.columns) out << " " << c << " |";
    out << "\n|";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << "---|";
    out << "\n";
    for (const auto& row : t.rows) {
      out << "|";
      for (const auto& cell : row) out << " " << cell << " |";
      out << "\n";
    }
    return;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    out << t.columns[c] << (c + 1 < t.columns.size() ? sep : "");
  }
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << (c + 1 < row.size() ? sep : "");
    }
    out << "\n";
  }
}

}  // namespace qrep::io
