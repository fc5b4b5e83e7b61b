#pragma once

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/series.hpp"

namespace evmanifold {

// Shortest round-trippable decimal representation of a double. 17 significant
// digits guarantee bit-exact reads, which the byte-identical-output contract
// relies on; trailing noise is avoided by trying 15 and 16 digits first.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

// Reads a two-column series file: header "date,value" (required), then one
// ISO-8601 date (at least year-month) and one decimal per row.
inline UniSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw data_error("'" + path + "' is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "date" || trim(header[1]) != "value") {
    throw data_error("'" + path + "': expected header 'date,value'");
  }
  UniSeries out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() < 2) {
      throw data_error("'" + path + "' line " + std::to_string(lineno) + ": expected 2 columns");
    }
    long t = 0;
    try {
      t = parse_date(trim(cells[0]));
    } catch (const data_error& e) {
      throw data_error("'" + path + "' line " + std::to_string(lineno) + ": " + e.what());
    }
    const std::string vs = trim(cells[1]);
    if (vs.empty()) {
      throw data_error("'" + path + "' line " + std::to_string(lineno) + ": missing value");
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(vs.c_str(), &end);
    if (errno != 0 || end == vs.c_str() || *end != '\0') {
      throw data_error("'" + path + "' line " + std::to_string(lineno) +
                       ": bad value '" + vs + "'");
    }
    out.times.push_back(t);
    out.values.push_back(v);
  }
  if (out.size() < 1) throw data_error("'" + path + "' has no data rows");
  out.validate();
  return out;
}

// All artifact writes go through a temp file and a rename so that readers
// never observe a half-written file.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw data_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw data_error("rename failed for '" + path + "'");
  }
}

inline void write_series_csv(const std::string& path, const UniSeries& s) {
  std::ostringstream out;
  out << "date,value\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_date(s.times[i]) << ',' << format_double(s.values[i]) << '\n';
  }
  atomic_write(path, out.str());
}

}  // namespace evmanifold
