#ifndef ORBITCVX_IO_HPP
#define ORBITCVX_IO_HPP

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "orbitcvx/config.hpp"
#include "orbitcvx/convex.hpp"
#include "orbitcvx/geomcore.hpp"
#include "orbitcvx/groups.hpp"
#include "orbitcvx/report.hpp"
#include "orbitcvx/submetry.hpp"

namespace orbitcvx {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Point& p) { return {{"dim", p.dim()}, {"coords", detail::vec_json(p.vec())}}; }

inline nlohmann::json to_json(const Subspace& s) {
  nlohmann::json basis = nlohmann::json::array();
  for (Eigen::Index j = 0; j < s.dim(); ++j) basis.push_back(detail::vec_json(s.basis().col(j)));
  return {{"ambient_dim", s.ambient_dim()}, {"basis", basis}};
}

inline nlohmann::json to_json(const PointCloud& c) {
  nlohmann::json pts = nlohmann::json::array();
  if (!c.is_empty())
    for (Eigen::Index j = 0; j < c.size(); ++j) pts.push_back(detail::vec_json(c.matrix().col(j)));
  return {{"dim", c.dim()}, {"label", c.label()}, {"points", pts}};
}

inline nlohmann::json to_json(const OrbitCloud& o) {
  return {{"cloud", to_json(o.base)},
          {"provenance",
           {{"action", o.action}, {"seed_point", to_json(o.seed_point)}, {"exact", o.exact}, {"seed", o.seed},
            {"budget", o.budget}}}};
}

inline nlohmann::json to_json(const MembershipResult& m) {
  nlohmann::json j = {{"inside", m.inside},
                      {"converged", m.converged},
                      {"distance", json_number(m.distance)},
                      {"lower_bound", json_number(m.lower_bound)},
                      {"nearest", detail::vec_json(m.nearest)},
                      {"iterations", m.iterations}};
  if (const auto* cc = std::get_if<ConvexCombination>(&m.certificate)) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const Vec& a : cc->atoms) atoms.push_back(detail::vec_json(a));
    j["certificate"] = {{"kind", "convex-combination"}, {"atoms", atoms}, {"weights", cc->weights}};
  } else if (const auto* sep = std::get_if<Separator>(&m.certificate)) {
    j["certificate"] = {{"kind", "separator"}, {"direction", detail::vec_json(sep->direction)},
                        {"margin", json_number(sep->margin)}};
  }
  return j;
}

inline nlohmann::json to_json(const SlopeEstimate& s) {
  return {{"base_point", to_json(s.base_point)},
          {"base_value", json_number(s.base_value)},
          {"radii", s.radii},
          {"per_radius_sup", s.per_radius_sup},
          {"extrapolated", json_number(s.extrapolated)},
          {"clamped", json_number(s.clamped)},
          {"sample_budget", s.sample_budget},
          {"skipped", s.skipped},
          {"seed", s.seed}};
}

inline Vec vec_from_json(const nlohmann::json& j, const char* where) {
  if (!j.is_array()) throw ConfigError(std::string(where) + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(where) + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Point point_from_json(const nlohmann::json& j) {
  if (j.is_array()) return Point(vec_from_json(j, "point"));
  const Vec v = vec_from_json(j.at("coords"), "point.coords");
  if (j.contains("dim")) require_dim("point_from_json", j.at("dim").get<Eigen::Index>(), v.size());
  return Point(v);
}

inline Subspace subspace_from_json(const nlohmann::json& j) {
  const Eigen::Index n = j.at("ambient_dim").get<Eigen::Index>();
  const auto& b = j.at("basis");
  Mat basis(n, static_cast<Eigen::Index>(b.size()));
  for (std::size_t c = 0; c < b.size(); ++c) {
    const Vec col = vec_from_json(b[c], "subspace.basis");
    require_dim("subspace_from_json", n, col.size());
    basis.col(static_cast<Eigen::Index>(c)) = col;
  }
  return Subspace(n, basis);
}

inline PointCloud cloud_from_json(const nlohmann::json& j) {
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  const auto& pts = j.at("points");
  const std::string label = j.value("label", std::string());
  if (pts.empty()) return PointCloud::empty(d, label);
  Mat m(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t c = 0; c < pts.size(); ++c) {
    const Vec col = vec_from_json(pts[c], "cloud.points");
    require_dim("cloud_from_json", d, col.size());
    m.col(static_cast<Eigen::Index>(c)) = col;
  }
  return PointCloud(m, label);
}

// ---------------------------------------------------------------------------
// CSV

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

/// Rows x_0..x_{d-1}, radius, sup, extrapolated: one per radius.
inline Table slope_table(const SlopeEstimate& s) {
  Table t{"slope", {}, {}};
  for (Eigen::Index i = 0; i < s.base_point.dim(); ++i) t.columns.push_back("x" + std::to_string(i));
  t.columns.insert(t.columns.end(), {"radius", "sup", "extrapolated"});
  for (std::size_t k = 0; k < s.radii.size(); ++k) {
    std::vector<double> row(s.base_point.vec().data(), s.base_point.vec().data() + s.base_point.dim());
    row.insert(row.end(), {s.radii[k], s.per_radius_sup[k], s.extrapolated});
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace detail {

inline void flatten_numbers(const nlohmann::json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten_numbers(v, path.empty() ? k : path + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten_numbers(j[i], path + "[" + std::to_string(i) + "]", out);
  } else if (j.is_number_integer()) {
    out.emplace_back(path, j.dump());
  } else if (j.is_number()) {
    out.emplace_back(path, format_double(j.get<double>()));
  } else if (j.is_boolean()) {
    out.emplace_back(path, j.get<bool>() ? "1" : "0");
  } else if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "-inf" ||
                               j.get<std::string>() == "nan")) {
    out.emplace_back(path, j.get<std::string>());
  }
}

}  // namespace detail

/// Every numeric leaf of a JSON document as "path,value" rows.
inline std::string metrics_csv(const nlohmann::json& j) {
  nlohmann::json keyed = j;
  if (keyed.contains("metrics") && keyed["metrics"].is_array()) {
    nlohmann::json by_name = nlohmann::json::object();
    for (const auto& m : keyed["metrics"]) by_name[m.at("name").get<std::string>()] = m;
    keyed["metrics"] = by_name;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  detail::flatten_numbers(keyed, "", rows);
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : rows) os << '"' << k << "\"," << v << '\n';
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

/// Writes <stem>.json, <stem>_metrics.csv and one <stem>_<table>.csv per
/// table into dir, and records the file names in r.artifacts.
inline std::filesystem::path write_report(VerificationReport& r, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  r.artifacts.clear();
  r.artifacts.push_back(stem + "_metrics.csv");
  for (const Table& t : r.tables) r.artifacts.push_back(stem + "_" + t.name + ".csv");
  for (const Table& t : r.tables) {
    std::ostringstream os;
    write_csv(os, t);
    write_text(dir / (stem + "_" + t.name + ".csv"), os.str());
  }
  const nlohmann::json j = to_json(r);
  write_text(dir / (stem + "_metrics.csv"), metrics_csv(j));
  write_text(dir / (stem + ".json"), j.dump(2) + "\n");
  return dir / (stem + ".json");
}

}  // namespace orbitcvx

#endif  // ORBITCVX_IO_HPP
