/*
 * Copyright 2026 the gridshare authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GRIDSHARE_CSV_HPP
#define GRIDSHARE_CSV_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridshare::csv {

/// Comma-separated rows, no quoting (none of the bundled schemas need it).
/// Field values are trimmed of surrounding whitespace and carriage returns.
struct Row {
  std::size_t line_number = 0;  // 1-based, header included
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

/// Reads a whole CSV file. Requires the given header (exact field names);
/// blank lines are skipped. Throws std::runtime_error with file/line context.
inline Table read_file(const std::string& path,
                       const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (table.header.empty()) {
      table.header = split_line(trimmed);
      if (table.header != expected_header) {
        std::ostringstream os;
        os << path << ":" << line_no << ": unexpected header, want ";
        for (std::size_t i = 0; i < expected_header.size(); ++i)
          os << (i ? "," : "") << expected_header[i];
        throw std::runtime_error(os.str());
      }
      continue;
    }
    Row row;
    row.line_number = line_no;
    row.fields = split_line(trimmed);
    if (row.fields.size() != table.header.size()) {
      std::ostringstream os;
      os << path << ":" << line_no << ": expected " << table.header.size()
         << " fields, got " << row.fields.size();
      throw std::runtime_error(os.str());
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty())
    throw std::runtime_error(path + ": empty file (missing header)");
  return table;
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(context + ": not a number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& context) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(context + ": not an integer: '" + s + "'");
  return v;
}

// ---- formatting helpers (deterministic, locale-free) ----

inline std::string format_double(double v) {  // shortest round-trip
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  return std::string(buf, r.ptr);
}

/// Writes content to path atomically (temp file in the same directory, then
/// rename), so partially written reports are never observed.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace gridshare::csv

#endif  // GRIDSHARE_CSV_HPP
