// Copyright 2026 The opaldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPALDP_CSV_HPP_
#define OPALDP_CSV_HPP_

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "opaldp/error.hpp"

namespace opaldp::csv {

using Row = std::vector<std::string>;

// Splits one line of comma-separated text. Double-quoted fields may contain
// commas and doubled quotes; embedded newlines are not supported.
inline Row SplitLine(std::string_view line, std::int64_t line_number = 0) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  Row fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field", line_number);
  fields.push_back(std::move(field));
  return fields;
}

inline std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void WriteRow(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out << ',';
    out << Escape(row[i]);
  }
  out << '\n';
}

struct Table {
  Row header;
  std::vector<Row> rows;
  // 1-based line number of each row in the source text.
  std::vector<std::int64_t> lines;
};

// Reads a header line followed by data rows. Blank lines are skipped; every
// data row must have as many fields as the header.
inline Table Read(std::istream& in) {
  Table table;
  std::string line;
  std::int64_t line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    Row row = SplitLine(line, line_number);
    if (!have_header) {
      if (line_number == 1 && row[0].starts_with("\xEF\xBB\xBF")) {
        row[0].erase(0, 3);
      }
      table.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != table.header.size()) {
      throw ValidationError("expected " + std::to_string(table.header.size()) +
                                " fields, found " + std::to_string(row.size()),
                            line_number);
    }
    table.rows.push_back(std::move(row));
    table.lines.push_back(line_number);
  }
  if (!have_header) throw ValidationError("missing header row");
  return table;
}

inline Table ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return Read(in);
}

}  // namespace opaldp::csv

#endif  // OPALDP_CSV_HPP_
