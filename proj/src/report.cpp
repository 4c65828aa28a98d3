#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "coalflow/experiments.hpp"
#include "format.hpp"

namespace coalflow {

using detail::fmt;
using Json = nlohmann::ordered_json;

namespace {

Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::AbsGap: return "abs-gap";
    case Rule::AtMost: return "at-most";
    case Rule::AtLeast: return "at-least";
    case Rule::Info: return "info";
  }
  return "info";
}

std::string cell(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string report_json(const ExperimentReport& rep, bool timing) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = rep.id;
  Json params = Json::object();
  for (const auto& [k, v] : rep.parameters) params[k] = v;
  j["parameters"] = params;
  j["replicas"] = rep.replicas;
  Json stats = Json::array();
  for (const auto& s : rep.statistics) {
    Json e;
    e["name"] = s.name;
    e["value"] = number(s.value);
    e["se"] = number(s.se);
    e["reference"] = number(s.reference);
    e["provenance"] = s.provenance.empty() ? Json(nullptr) : Json(s.provenance);
    e["rule"] = rule_name(s.rule);
    e["tolerance"] = number(s.tolerance);
    e["gap"] = number(s.gap());
    if (s.rule != Rule::Info) e["pass"] = s.pass;
    stats.push_back(std::move(e));
  }
  j["statistics"] = stats;
  j["pass"] = rep.pass;
  if (timing) j["wall_time_s"] = rep.wall_time;
  return j.dump(2) + "\n";
}

std::string report_text(const ExperimentReport& rep, bool timing) {
  std::ostringstream os;
  os << "experiment " << rep.id << "  (schema " << kReportSchemaVersion << ")\n";
  for (const auto& [k, v] : rep.parameters) os << "  " << k << " = " << v << "\n";
  if (rep.replicas) os << "  replicas = " << rep.replicas << "\n";

  const std::vector<std::string> head{"statistic", "value", "se", "reference", "provenance", "gap", "tolerance", "verdict"};
  std::vector<std::vector<std::string>> rows{head};
  for (const auto& s : rep.statistics) {
    std::string verdict = s.rule == Rule::Info ? "" : (s.pass ? "PASS" : "FAIL");
    rows.push_back({s.name, cell(s.value), cell(s.se), cell(s.reference), s.provenance, cell(s.gap()),
                    s.rule == Rule::Info ? "-" : cell(s.tolerance), verdict});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    os << " ";
    for (std::size_t c = 0; c < r.size(); ++c) {
      os << " " << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c])) << r[c];
    }
    os << "\n";
  }
  os << "result: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  if (timing) os << "wall time: " << cell(rep.wall_time) << " s\n";
  return os.str();
}

void write_raw_csv(const ExperimentReport& rep, std::ostream& os) {
  for (std::size_t c = 0; c < rep.raw_columns.size(); ++c) os << (c ? "," : "") << rep.raw_columns[c];
  os << "\n";
  for (const auto& row : rep.raw_rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt(row[c]);
    os << "\n";
  }
}

}  // namespace coalflow
