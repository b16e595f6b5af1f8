// Copyright 2026 The qsalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Tabular reports with a stable column order, emitted as CSV or JSON.
// Floating-point cells are rendered with 12 significant digits and the JSON
// encoding carries exactly the value printed in the CSV.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qsalab/error.hpp"

namespace qsalab {

using Cell = std::variant<std::string, std::int64_t, std::uint64_t, double>;

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw UsageError("report", "unknown report format \"" + s + "\"");
}

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::string>) return v;
        else if constexpr (std::is_same_v<V, double>) return format_real(v);
        else return std::to_string(v);
      },
      c);
}

inline void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
    out << '\n';
  }
}

/// Array of objects keyed by column name.
inline nlohmann::json table_json(const Table& t) {
  auto arr = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              if (std::isfinite(v)) obj[t.columns[c]] = std::strtod(format_real(v).c_str(), nullptr);
              else obj[t.columns[c]] = nullptr;
            } else {
              obj[t.columns[c]] = v;
            }
          },
          row[c]);
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

inline void write_table(const Table& t, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::csv) write_csv(t, out);
  else out << table_json(t).dump(2) << '\n';
}

/// Writes `text` to `path`, creating parent directories.
inline void write_text_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::data, "report", "cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::data, "report", "write to " + path + " failed");
}

inline void emit_table(const Table& t, ReportFormat format, const std::string& path) {
  std::ostringstream s;
  write_table(t, format, s);
  write_text_file(path, s.str());
}

}  // namespace qsalab
