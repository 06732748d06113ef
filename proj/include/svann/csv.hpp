// RFC-4180 CSV emission: fields containing commas, quotes or newlines are
// quoted, quotes doubled. Rows end with \r\n.

#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace svann {

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += "\r\n";
  return out;
}

/// Fixed-point formatting keeps emitted tables byte-identical across runs.
inline std::string csv_num(double v, int precision = 6) {
  std::ostringstream out;
  out.precision(precision);
  out << std::fixed << v;
  return out.str();
}

}  // namespace svann
