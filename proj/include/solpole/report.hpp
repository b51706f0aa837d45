#pragma once

// Shared output plumbing: the versioned JSON envelope and RFC-4180 CSV.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "solpole/config.hpp"

namespace solpole::report {

inline constexpr std::string_view kSchema = "soliton-pole-lab/1";

// %.17g, so a double survives a text round trip.
std::string format_double(double v);

// Quotes a field when it holds a comma, quote, CR or LF; inner quotes doubled.
std::string csv_field(std::string_view s);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);  // must match the header width
  void add_numeric_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;  // CRLF line endings, header first

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

nlohmann::ordered_json complex_json(Complex z);
nlohmann::ordered_json config_json(const SolitonConfig& cfg);

// {"schema": ..., "command": ..., "config": ...}; callers append "result".
nlohmann::ordered_json envelope(std::string_view command, const SolitonConfig& cfg);

// Two-space indent plus trailing newline.
std::string dump(const nlohmann::ordered_json& j);

}  // namespace solpole::report
