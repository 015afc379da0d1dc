#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "renewal_lab/error.hpp"

namespace renewal_lab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportVersion = "renewal_lab-1";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) {
    if (row.size() != columns.size()) fail(ErrorCode::InvalidArgument, "row width does not match table columns");
    rows.push_back(std::move(row));
  }
};

enum class Status { Pass, Fail, Audit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Audit: return "audit";
  }
  return "?";
}

struct Verdict {
  std::string id;
  Status status = Status::Audit;
  double tolerance = 0.0;
  std::string detail;
};

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "nan";
  return v.dump();
}

class ExperimentReport {
 public:
  explicit ExperimentReport(std::string name) {
    meta_["experiment"] = std::move(name);
    meta_["version"] = kReportVersion;
  }

  Json& meta() { return meta_; }
  const Json& meta() const { return meta_; }

  Table& table(const std::string& name, std::vector<std::string> columns) {
    for (auto& [n, t] : tables_) {
      if (n == name) return t;
    }
    tables_.emplace_back(name, Table{std::move(columns), {}});
    return tables_.back().second;
  }

  const std::deque<std::pair<std::string, Table>>& tables() const { return tables_; }
  const std::vector<Verdict>& verdicts() const { return verdicts_; }

  /// Records a verdict and declares its tolerance in the metadata.
  void verdict(const std::string& id, bool asserted, bool ok, double tolerance, std::string detail = {}) {
    meta_["tolerances"][id] = tolerance;
    verdicts_.push_back({id, asserted ? (ok ? Status::Pass : Status::Fail) : Status::Audit, tolerance,
                         std::move(detail)});
  }

  bool any_failed() const {
    for (const auto& v : verdicts_) {
      if (v.status == Status::Fail) return true;
    }
    return false;
  }

  Json to_json() const {
    Json j;
    j["meta"] = meta_;
    Json tabs = Json::object();
    for (const auto& [name, t] : tables_) {
      Json rows = Json::array();
      for (const auto& r : t.rows) {
        Json row = Json::object();
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
          const Json& v = r[c];
          row[t.columns[c]] = v.is_number_float() && !std::isfinite(v.get<double>()) ? Json(nullptr) : v;
        }
        rows.push_back(std::move(row));
      }
      tabs[name] = std::move(rows);
    }
    j["tables"] = std::move(tabs);
    Json vs = Json::array();
    for (const auto& v : verdicts_) {
      Json e;
      e["id"] = v.id;
      e["status"] = to_string(v.status);
      e["tolerance"] = v.tolerance;
      if (!v.detail.empty()) e["detail"] = v.detail;
      vs.push_back(std::move(e));
    }
    j["verdicts"] = std::move(vs);
    return j;
  }

  void write_json(std::ostream& os) const { os << to_json().dump(2) << '\n'; }

  static void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << csv_cell(r[c]);
      os << '\n';
    }
  }

 private:
  Json meta_ = Json::object();
  std::deque<std::pair<std::string, Table>> tables_;
  std::vector<Verdict> verdicts_;
};

}  // namespace renewal_lab
