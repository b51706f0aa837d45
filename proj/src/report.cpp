#include "solpole/report.hpp"

#include <cstdio>
#include <sstream>

#include "solpole/exppoly.hpp"

namespace solpole::report {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw PreconditionError("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw PreconditionError("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                            std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

void CsvTable::add_numeric_row(const std::vector<double>& row) {
  std::vector<std::string> fields;
  fields.reserve(row.size());
  for (double v : row) fields.push_back(format_double(v));
  add_row(std::move(fields));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

nlohmann::ordered_json complex_json(Complex z) { return {z.real(), z.imag()}; }

nlohmann::ordered_json config_json(const SolitonConfig& cfg) {
  nlohmann::ordered_json j;
  j["k1"] = cfg.k1;
  j["k2"] = cfg.k2;
  j["variant"] = std::string(to_string(cfg.variant));
  j["x1"] = cfg.x1;
  j["x2"] = cfg.x2;
  j["gamma"] = cfg.gamma;
  j["mode"] = cfg.is_exact() ? "exact" : "approximate";
  if (cfg.is_exact()) {
    j["k1_exact"] = to_json(*cfg.k1_exact);
    j["k2_exact"] = to_json(*cfg.k2_exact);
  }
  if (cfg.comm) {
    j["p1"] = cfg.comm->p1;
    j["p2"] = cfg.comm->p2;
    j["lambda"] = cfg.comm->lambda;
  } else {
    j["p1"] = nullptr;
    j["p2"] = nullptr;
    j["lambda"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json envelope(std::string_view command, const SolitonConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = std::string(kSchema);
  j["command"] = std::string(command);
  j["config"] = config_json(cfg);
  return j;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace solpole::report
