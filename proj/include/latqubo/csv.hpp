#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/npy.hpp"

namespace latqubo {

struct CsvCell {
  std::size_t line = 0;  // 1-based file line
  std::string text;
};

namespace csv_detail {

/// Splits one CSV record on commas. Double-quoted fields may contain commas
/// and `""` escapes.
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::vector<CsvCell> read_cells(const std::filesystem::path& path, std::string_view column) {
  const std::string text = read_file_bytes(path);
  std::vector<CsvCell> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t col = 0;
  std::size_t width = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (line.empty()) continue;

    auto fields = split_record(line);
    if (width == 0) {
      width = fields.size();
      bool found = false;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (trim(fields[i]) == column) {
          col = i;
          found = true;
          break;
        }
      }
      if (!found) {
        throw MissingColumnError("column '" + std::string(column) + "' not found in " + path.string());
      }
      continue;
    }
    if (fields.size() != width) {
      throw ParseError(line_no, path.string() + ": row " + std::to_string(line_no) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(width));
    }
    out.push_back({line_no, std::move(fields[col])});
  }
  if (width == 0) throw MissingColumnError(path.string() + " has no header row");
  return out;
}

}  // namespace csv_detail

/// Column of a comma-separated file with a header row, as raw strings in file
/// order.
inline std::vector<std::string> read_csv_column(const std::filesystem::path& path,
                                                std::string_view column) {
  std::vector<std::string> out;
  for (auto& cell : csv_detail::read_cells(path, column)) out.push_back(std::move(cell.text));
  return out;
}

/// Numeric column; cells must be plain decimal/scientific notation. Parse
/// failures report the 1-based file line.
inline Vector read_csv_numeric_column(const std::filesystem::path& path, std::string_view column) {
  const auto cells = csv_detail::read_cells(path, column);
  Vector out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto cell = csv_detail::trim(cells[i].text);
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last) {
      throw ParseError(cells[i].line, path.string() + ": cannot parse '" + std::string(cell) +
                                          "' as a number in column '" + std::string(column) +
                                          "' at row " + std::to_string(cells[i].line));
    }
    out[i] = v;
  }
  return out;
}

}  // namespace latqubo
