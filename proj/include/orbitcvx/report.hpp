#ifndef ORBITCVX_REPORT_HPP
#define ORBITCVX_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace orbitcvx {

enum class Status { pass, fail, unconverged };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::unconverged: return "unconverged";
  }
  return "fail";
}

enum class Compare { le, ge, eq };

inline const char* to_string(Compare c) {
  switch (c) {
    case Compare::le: return "<=";
    case Compare::ge: return ">=";
    case Compare::eq: return "==";
  }
  return "?";
}

/// One measured quantity together with the threshold it is judged against.
/// Sampled metrics depend on a Monte-Carlo budget; failing one of them
/// yields `unconverged` instead of `fail`.
struct Metric {
  std::string name;
  double value = 0.0;
  Compare cmp = Compare::le;
  double threshold = 0.0;
  bool sampled = false;

  bool ok() const {
    if (std::isnan(value)) return false;
    switch (cmp) {
      case Compare::le: return value <= threshold;
      case Compare::ge: return value >= threshold;
      case Compare::eq: return std::abs(value - threshold) <= 1e-12 * std::max(1.0, std::abs(threshold));
    }
    return false;
  }
};

/// Plot-ready numeric table exported next to a report as CSV.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Machine-checkable outcome of a verification run. The status is derived
/// from the metrics, never set by hand.
struct VerificationReport {
  std::string scenario_id;
  std::string verdict;
  std::vector<Metric> metrics;
  std::vector<std::pair<std::string, double>> info;
  std::map<std::string, std::int64_t> budgets;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> artifacts;
  std::vector<Table> tables;
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();

  VerificationReport() = default;
  explicit VerificationReport(std::string id) : scenario_id(std::move(id)) {}

  const Metric& check(std::string name, double value, Compare cmp, double threshold, bool sampled = false) {
    metrics.push_back(Metric{std::move(name), value, cmp, threshold, sampled});
    return metrics.back();
  }
  void note(std::string name, double value) { info.emplace_back(std::move(name), value); }

  Status status() const {
    bool unconverged = false;
    for (const Metric& m : metrics) {
      if (m.ok()) continue;
      if (!m.sampled) return Status::fail;
      unconverged = true;
    }
    return unconverged ? Status::unconverged : Status::pass;
  }
  bool passed() const { return status() == Status::pass; }

  const Metric* find(const std::string& name) const {
    for (const Metric& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }
  double value(const std::string& name) const {
    if (const Metric* m = find(name)) return m->value;
    for (const auto& [k, v] : info)
      if (k == name) return v;
    throw std::out_of_range("VerificationReport: no metric named " + name);
  }
  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const Metric& m : metrics)
      if (!m.ok()) out.push_back(m.name);
    return out;
  }

  /// Folds another report's metrics in under a name prefix.
  void absorb(const VerificationReport& other, const std::string& prefix) {
    for (Metric m : other.metrics) {
      m.name = prefix + m.name;
      metrics.push_back(std::move(m));
    }
    for (const auto& [k, v] : other.info) info.emplace_back(prefix + k, v);
    for (const auto& [k, v] : other.budgets) budgets[prefix + k] = v;
    if (!other.details.empty()) details[prefix + "details"] = other.details;
    for (Table t : other.tables) {
      t.name = prefix + t.name;
      tables.push_back(std::move(t));
    }
  }
};

inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["scenario_id"] = r.scenario_id;
  j["status"] = to_string(r.status());
  j["verdict"] = r.verdict;
  nlohmann::json metrics = nlohmann::json::array();
  for (const Metric& m : r.metrics) {
    metrics.push_back({{"name", m.name},
                       {"value", json_number(m.value)},
                       {"cmp", to_string(m.cmp)},
                       {"threshold", json_number(m.threshold)},
                       {"sampled", m.sampled},
                       {"ok", m.ok()}});
  }
  j["metrics"] = std::move(metrics);
  nlohmann::json info = nlohmann::json::object();
  for (const auto& [k, v] : r.info) info[k] = json_number(v);
  j["info"] = std::move(info);
  j["budgets"] = r.budgets;
  j["seeds"] = r.seeds;
  j["artifacts"] = r.artifacts;
  j["details"] = r.details;
  j["config"] = r.config;
  return j;
}

}  // namespace orbitcvx

#endif  // ORBITCVX_REPORT_HPP
