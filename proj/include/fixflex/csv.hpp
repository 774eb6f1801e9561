#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "fixflex/common.hpp"

namespace fixflex::csv {

// Splits one CSV record. Double-quoted fields may contain commas; "" is an
// escaped quote.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// A parsed CSV file: header plus data rows. Blank lines and lines starting
// with '#' are skipped.
class Table {
 public:
  static Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    Table t;
    t.file_ = path.string();
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++lineno;
      auto v = trim(line);
      if (v.empty() || v.front() == '#') continue;
      if (!have_header) {
        t.header_ = split(v);
        have_header = true;
        continue;
      }
      auto fields = split(v);
      if (fields.size() != t.header_.size()) {
        throw ParseError(t.file_, lineno,
                         "expected " + std::to_string(t.header_.size()) + " fields, got " +
                             std::to_string(fields.size()));
      }
      t.rows_.push_back({lineno, std::move(fields)});
    }
    return t;
  }

  const std::string& file() const noexcept { return file_; }
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  bool empty_file() const noexcept { return header_.empty(); }

  // Throws unless the header is exactly `expected`.
  void require_header(const std::vector<std::string>& expected) const {
    if (header_ != expected) {
      std::string want;
      for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
      throw ParseError(file_, 1, "expected header '" + want + "'");
    }
  }

  double real(const Row& row, std::size_t col) const {
    const std::string& s = row.fields.at(col);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ParseError(file_, row.line, "column '" + header_.at(col) + "': not a number: '" + s + "'");
    }
    return v;
  }

  std::int64_t integer(const Row& row, std::size_t col) const {
    const std::string& s = row.fields.at(col);
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ParseError(file_, row.line, "column '" + header_.at(col) + "': not an integer: '" + s + "'");
    }
    return v;
  }

 private:
  std::string file_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

}  // namespace fixflex::csv
