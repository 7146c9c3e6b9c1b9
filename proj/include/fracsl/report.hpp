#pragma once

// Tabular CLI report with CSV and JSON encodings.
//
// JSON layout (keys in this order, all snake_case):
//   {
//     "schema":  "fracsl-report/1",
//     "version": "<library version>",
//     "command": "<subcommand>",
//     "status":  "ok" | "error",
//     "error":   null | {"name": "...", "message": "..."},
//     "config":  {"<flag>": "<value as given or defaulted>", ...},
//     "summary": {"<key>": <number|string|bool>, ...},
//     "columns": ["<name>", ...],
//     "rows":    [[<cell>, ...], ...]
//   }
//
// CSV carries only the table: one header row with the column names, then
// one line per row. An error report becomes the single row
// status,error_name,error_message.

#include <fracsl/errors.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fracsl {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "fracsl-report/1";

using Cell = std::variant<std::int64_t, double, bool, std::string>;

struct Report {
  std::string command;
  std::string version = kVersion;
  std::string status = "ok";
  std::string error_name;
  std::string error_message;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, Cell>> summary;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool operator==(const Report&) const = default;

  void fail(const Error& e) {
    status = "error";
    error_name = e.name();
    error_message = e.what();
  }
};

namespace detail {

// Shortest text that reads back to the same double; no locale involved.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
          return v;
        } else {
          return v;
        }
      },
      c);
}

inline Cell cell_from_json(const nlohmann::ordered_json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ParseError("unsupported report cell", j.dump());
}

}  // namespace detail

inline std::string to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["version"] = r.version;
  j["command"] = r.command;
  j["status"] = r.status;
  if (r.status == "ok") {
    j["error"] = nullptr;
  } else {
    j["error"] = {{"name", r.error_name}, {"message", r.error_message}};
  }
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.config) j["config"][k] = v;
  j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.summary) j["summary"][k] = detail::cell_json(v);
  j["columns"] = r.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    auto jr = nlohmann::ordered_json::array();
    for (const auto& c : row) jr.push_back(detail::cell_json(c));
    j["rows"].push_back(std::move(jr));
  }
  return j.dump(2) + "\n";
}

inline Report report_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what(), text.substr(0, 32));
  }
  try {
    if (j.at("schema").get<std::string>() != kReportSchema) {
      throw ParseError("unknown report schema", j.at("schema").get<std::string>());
    }
    Report r;
    r.version = j.at("version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.status = j.at("status").get<std::string>();
    if (!j.at("error").is_null()) {
      r.error_name = j["error"].at("name").get<std::string>();
      r.error_message = j["error"].at("message").get<std::string>();
    }
    for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("summary").items()) r.summary.emplace_back(k, detail::cell_from_json(v));
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
      std::vector<Cell> row;
      for (const auto& c : jr) row.push_back(detail::cell_from_json(c));
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON does not match the schema: ") + e.what(), "");
  }
}

inline std::string to_csv(const Report& r) {
  std::ostringstream os;
  if (r.status != "ok") {
    os << "status,error_name,error_message\n";
    os << detail::csv_field(r.status) << ',' << detail::csv_field(r.error_name) << ','
       << detail::csv_field(r.error_message) << '\n';
    return os.str();
  }
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << detail::csv_field(r.columns[i]);
  os << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(detail::cell_text(row[i]));
    os << '\n';
  }
  return os.str();
}

}  // namespace fracsl
