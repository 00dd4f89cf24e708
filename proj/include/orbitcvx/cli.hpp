#ifndef ORBITCVX_CLI_HPP
#define ORBITCVX_CLI_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "orbitcvx/config.hpp"
#include "orbitcvx/groups.hpp"
#include "orbitcvx/io.hpp"
#include "orbitcvx/report.hpp"
#include "orbitcvx/scenarios.hpp"
#include "orbitcvx/submetry.hpp"

namespace orbitcvx::cli {

using nlohmann::json;

/// Effective configuration of one run, echoed into its outputs.
struct RunConfig {
  std::string scenario;
  json params = json::object();
  std::uint64_t seed = kDefaultSeed;
  std::string output_dir = "out";
  int jobs = 1;

  json to_json() const {
    return {{"scenario", scenario}, {"params", params}, {"seed", seed}, {"output_dir", output_dir}, {"jobs", jobs}};
  }
};

// ---------------------------------------------------------------------------
// Shorthands

/// "O2", "SO3", "S3", "D10", "C5", "PM2", optionally suffixed ":conj",
/// ":diagK", ":std" or ":perm".
inline json action_shorthand(const std::string& text) {
  static const std::regex re(R"(^(SO|O|S|D|C|PM)(\d+)(?::(conj|std|perm|diag(\d+)))?$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("action: cannot parse shorthand \"" + text + "\"");
  static const std::map<std::string, std::string> families{{"O", "O"},         {"SO", "SO"},    {"S", "S"},
                                                           {"D", "dihedral"}, {"C", "cyclic"}, {"PM", "sign"}};
  json j = {{"family", families.at(m[1].str())}, {"n", std::stoi(m[2].str())}};
  if (m[3].matched) {
    const std::string rep = m[3].str();
    if (rep == "conj") j["rep"] = "conjugation-symmetric";
    else if (rep == "std") j["rep"] = "standard";
    else if (rep == "perm") j["rep"] = "permutation";
    else {
      j["rep"] = "diagonal";
      j["copies"] = std::stoi(m[4].str());
    }
  }
  return j;
}

inline json action_param(const json& p) { return p.is_string() ? action_shorthand(p.get<std::string>()) : p; }

inline std::vector<double> number_list(const std::string& text, const char* where) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError(std::string(where) + ": bad number \"" + item + "\"");
    out.push_back(v);
  }
  return out;
}

/// "radial:a,b", "fibers:x,y;x,y" or "sublevel:x,y@c".
inline json set_shorthand(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("set: expected kind:arguments, got \"" + text + "\"");
  const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
  if (kind == "radial") return {{"kind", "radial"}, {"interval", number_list(rest, "set")}};
  if (kind == "fibers") {
    json reps = json::array();
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ';')) reps.push_back(number_list(item, "set"));
    return {{"kind", "fibers"}, {"reps", reps}};
  }
  if (kind == "sublevel") {
    const auto at = rest.find('@');
    if (at == std::string::npos) throw ConfigError("set: sublevel needs point@level");
    const std::vector<double> level = number_list(rest.substr(at + 1), "set");
    if (level.size() != 1) throw ConfigError("set: sublevel needs a single level");
    return {{"kind", "basic-sublevel"}, {"function", "support-of-orbit"}, {"point", number_list(rest.substr(0, at), "set")},
            {"level", level[0]}};
  }
  throw ConfigError("set: unknown kind \"" + kind + "\"");
}

inline json set_param(const json& p) { return p.is_string() ? set_shorthand(p.get<std::string>()) : p; }

// ---------------------------------------------------------------------------
// Commands

struct Outcome {
  int exit_code = 0;
  std::vector<std::string> lines;  // printed to stdout
  std::vector<std::string> errors;  // printed to stderr
};

struct Command {
  std::string name;
  std::string summary;
  json defaults;  // every accepted parameter with its default
  std::function<Outcome(const RunConfig&)> run;
};

namespace detail {

template <class T>
T param(const json& p, const char* key) {
  try {
    return p.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parameter \"") + key + "\": " + e.what());
  }
}

inline std::string stem(const RunConfig& rc) { return rc.scenario + "_" + std::to_string(rc.seed); }

/// Writes the report and turns its status into an exit code.
inline Outcome finish(VerificationReport r, const RunConfig& rc) {
  r.config = rc.to_json();
  const std::filesystem::path path = write_report(r, rc.output_dir, stem(rc));
  Outcome o;
  o.lines.push_back(std::string(to_string(r.status())) + " " + r.scenario_id + " verdict=" + r.verdict + " report=" + path.string());
  for (const Metric& m : r.metrics)
    if (!m.ok()) {
      o.errors.push_back("failing metric " + m.name + " = " + format_double(m.value) + " (required " + to_string(m.cmp) +
                         " " + format_double(m.threshold) + (m.sampled ? ", sampled" : "") + ")");
    }
  o.exit_code = r.passed() ? 0 : 1;
  return o;
}

inline Outcome write_json_artifact(const RunConfig& rc, json body, const std::vector<Table>& tables) {
  std::filesystem::create_directories(rc.output_dir);
  const std::string s = stem(rc);
  body["config"] = rc.to_json();
  body["artifacts"] = json::array({s + "_metrics.csv"});
  for (const Table& t : tables) body["artifacts"].push_back(s + "_" + t.name + ".csv");
  write_text(std::filesystem::path(rc.output_dir) / (s + "_metrics.csv"), metrics_csv(body));
  for (const Table& t : tables) {
    std::ostringstream os;
    write_csv(os, t);
    write_text(std::filesystem::path(rc.output_dir) / (s + "_" + t.name + ".csv"), os.str());
  }
  const std::filesystem::path path = std::filesystem::path(rc.output_dir) / (s + ".json");
  write_text(path, body.dump(2) + "\n");
  return {0, {"wrote " + path.string()}, {}};
}

inline Outcome run_orbit(const RunConfig& rc) {
  const json& p = rc.params;
  const GroupAction action = make_action(action_param(p.at("action")));
  const Point v = point_from_json(p.at("point"));
  const OrbitCloud oc = orbit(action, v, param<int>(p, "budget"), rc.seed);
  return write_json_artifact(rc, {{"orbit", to_json(oc)}}, {orbitcvx::detail::cloud_table("points", oc.base.matrix())});
}

inline Outcome run_slope(const RunConfig& rc) {
  const json& p = rc.params;
  const GroupAction action = make_action(action_param(p.at("action")));
  const SaturatedSet s = make_saturated_set(action, set_param(p.at("set")));
  const Point x = point_from_json(p.at("point"));
  std::vector<double> radii = param<std::vector<double>>(p, "radii");
  if (radii.empty()) radii = default_radii(distance_to_saturated(s, x));
  const SlopeEstimate est = ascending_slope(s, x, radii, param<int>(p, "per_radius_budget"), rc.seed);
  return write_json_artifact(rc, {{"slope", to_json(est)}, {"set", s.descriptor()}}, {slope_table(est)});
}

inline Outcome run_detect(const RunConfig& rc) {
  const json& p = rc.params;
  const GroupAction action = make_action(action_param(p.at("action")));
  const SaturatedSet s = make_saturated_set(action, set_param(p.at("set")));
  DetectConfig dc;
  dc.probe_budget = param<int>(p, "probe_budget");
  dc.per_radius_budget = param<int>(p, "per_radius_budget");
  dc.tol = param<double>(p, "tol");
  dc.ball_radius = param<double>(p, "ball_radius");
  dc.seed = rc.seed;
  dc.jobs = rc.jobs;
  VerificationReport r = convexity_detect(s, dc);
  return finish(std::move(r), rc);
}

}  // namespace detail

/// Every subcommand taking parameters: orbit, slope, detect and the
/// scenarios reachable through `verify`.
inline const std::vector<Command>& commands() {
  using detail::param;
  static const std::vector<Command> all = [] {
    std::vector<Command> c;
    c.push_back({"orbit", "sample or enumerate the orbit of a point",
                 {{"action", "O2"}, {"point", {1.0, 0.0}}, {"budget", 1000}}, detail::run_orbit});
    c.push_back({"slope", "ascending slope of the distance to a saturated set",
                 {{"action", "O2"}, {"set", "radial:1,1"}, {"point", {0.5, 0.0}}, {"radii", json::array()},
                  {"per_radius_budget", 32}},
                 detail::run_slope});
    c.push_back({"detect", "slope-based convexity detector",
                 {{"action", "O2"}, {"set", "radial:0,1"}, {"probe_budget", 200}, {"per_radius_budget", 32},
                  {"tol", 0.02}, {"ball_radius", 0.0}},
                 detail::run_detect});

    const SchurHornConfig sh;
    c.push_back({"schur-horn", "diagonals of a conjugation orbit against the permutohedron",
                 {{"n", sh.n}, {"eigenvalues", sh.eigenvalues}, {"orbit_budget", sh.orbit_budget},
                  {"direction_budget", sh.direction_budget}, {"tol", sh.tol}, {"inclusion_tol", sh.inclusion_tol}},
                 [](const RunConfig& rc) {
                   SchurHornConfig cfg;
                   cfg.n = param<int>(rc.params, "n");
                   cfg.eigenvalues = param<std::vector<double>>(rc.params, "eigenvalues");
                   cfg.orbit_budget = param<int>(rc.params, "orbit_budget");
                   cfg.direction_budget = param<int>(rc.params, "direction_budget");
                   cfg.tol = param<double>(rc.params, "tol");
                   cfg.inclusion_tol = param<double>(rc.params, "inclusion_tol");
                   cfg.seed = rc.seed;
                   cfg.jobs = rc.jobs;
                   return detail::finish(scenario_schur_horn(cfg), rc);
                 }});

    const FatSectionConfig fs;
    c.push_back({"fat-section", "O(n) on (R^n)^k restricted to (R^k)^k",
                 {{"n", fs.n}, {"k", fs.k}, {"v", fs.v}, {"orbit_budget", fs.orbit_budget},
                  {"direction_budget", fs.direction_budget}, {"pairs", fs.pairs}, {"support_refine", fs.support_refine},
                  {"hull_tol", fs.hull_tol}, {"inclusion_tol", fs.inclusion_tol}, {"isometry_tol", fs.isometry_tol}},
                 [](const RunConfig& rc) {
                   FatSectionConfig cfg;
                   cfg.n = param<int>(rc.params, "n");
                   cfg.k = param<int>(rc.params, "k");
                   cfg.v = param<std::vector<double>>(rc.params, "v");
                   cfg.orbit_budget = param<int>(rc.params, "orbit_budget");
                   cfg.direction_budget = param<int>(rc.params, "direction_budget");
                   cfg.pairs = param<int>(rc.params, "pairs");
                   cfg.support_refine = param<int>(rc.params, "support_refine");
                   cfg.hull_tol = param<double>(rc.params, "hull_tol");
                   cfg.inclusion_tol = param<double>(rc.params, "inclusion_tol");
                   cfg.isometry_tol = param<double>(rc.params, "isometry_tol");
                   cfg.seed = rc.seed;
                   cfg.jobs = rc.jobs;
                   return detail::finish(scenario_fat_section(cfg), rc);
                 }});

    const OrbitopeGapConfig og;
    c.push_back({"orbitope-gap", "dimension of the projected orbit against the reduced orbitope",
                 {{"n", og.n}, {"k", og.k}, {"v", og.v}, {"orbit_budget", og.orbit_budget},
                  {"base_points", og.base_points}, {"patch_samples", og.patch_samples},
                  {"patch_radius", og.patch_radius}, {"local_rel_tol", og.local_rel_tol}},
                 [](const RunConfig& rc) {
                   OrbitopeGapConfig cfg;
                   cfg.n = param<int>(rc.params, "n");
                   cfg.k = param<int>(rc.params, "k");
                   cfg.v = param<std::vector<double>>(rc.params, "v");
                   cfg.orbit_budget = param<int>(rc.params, "orbit_budget");
                   cfg.base_points = param<int>(rc.params, "base_points");
                   cfg.patch_samples = param<int>(rc.params, "patch_samples");
                   cfg.patch_radius = param<double>(rc.params, "patch_radius");
                   cfg.local_rel_tol = param<double>(rc.params, "local_rel_tol");
                   cfg.seed = rc.seed;
                   return detail::finish(scenario_orbitope_gap(cfg), rc);
                 }});

    const FiniteCounterexampleConfig fc;
    c.push_back({"finite-counterexample", "non-convex orbits of a finite group with Σ = V",
                 {{"group", "PM2"}, {"v", fc.v}, {"tol", fc.tol}, {"probe_budget", fc.probe_budget},
                  {"per_radius_budget", fc.per_radius_budget}},
                 [](const RunConfig& rc) {
                   FiniteCounterexampleConfig cfg;
                   cfg.group = action_param(rc.params.at("group"));
                   cfg.v = param<std::vector<double>>(rc.params, "v");
                   cfg.tol = param<double>(rc.params, "tol");
                   cfg.probe_budget = param<int>(rc.params, "probe_budget");
                   cfg.per_radius_budget = param<int>(rc.params, "per_radius_budget");
                   cfg.seed = rc.seed;
                   return detail::finish(scenario_finite_counterexample(cfg), rc);
                 }});

    const FixedPointsConfig fp;
    c.push_back({"fixed-points", "fixed-point subspace properties",
                 {{"action", "S3"}, {"sample_budget", fp.sample_budget}, {"orbit_budget", fp.orbit_budget},
                  {"fat_n", fp.fat_n}, {"fat_k", fp.fat_k}, {"tol", fp.tol}, {"nearest_tol", fp.nearest_tol}},
                 [](const RunConfig& rc) {
                   FixedPointsConfig cfg;
                   cfg.action = action_param(rc.params.at("action"));
                   cfg.sample_budget = param<int>(rc.params, "sample_budget");
                   cfg.orbit_budget = param<int>(rc.params, "orbit_budget");
                   cfg.fat_n = param<int>(rc.params, "fat_n");
                   cfg.fat_k = param<int>(rc.params, "fat_k");
                   cfg.tol = param<double>(rc.params, "tol");
                   cfg.nearest_tol = param<double>(rc.params, "nearest_tol");
                   cfg.seed = rc.seed;
                   return detail::finish(scenario_fixed_points(cfg), rc);
                 }});

    const PolarSuiteConfig ps;
    const json polar_defaults = {{"clouds", ps.clouds},         {"max_dim", ps.max_dim},
                                 {"min_points", ps.min_points}, {"max_points", ps.max_points},
                                 {"direction_budget", ps.direction_budget}, {"tol", ps.tol}};
    auto polar_cfg = [](const RunConfig& rc) {
      PolarSuiteConfig cfg;
      cfg.clouds = param<int>(rc.params, "clouds");
      cfg.max_dim = param<int>(rc.params, "max_dim");
      cfg.min_points = param<int>(rc.params, "min_points");
      cfg.max_points = param<int>(rc.params, "max_points");
      cfg.direction_budget = param<int>(rc.params, "direction_budget");
      cfg.tol = param<double>(rc.params, "tol");
      if (cfg.max_dim < 2 || cfg.min_points < 1 || cfg.max_points < cfg.min_points)
        throw ConfigError("polar suite: need max_dim >= 2 and 1 <= min_points <= max_points");
      cfg.seed = rc.seed;
      cfg.jobs = rc.jobs;
      return cfg;
    };
    c.push_back({"bipolar", "bipolar identity on random clouds", polar_defaults,
                 [polar_cfg](const RunConfig& rc) { return detail::finish(scenario_bipolar(polar_cfg(rc)), rc); }});
    c.push_back({"projection-polar", "projection/polar identity on random clouds", polar_defaults,
                 [polar_cfg](const RunConfig& rc) { return detail::finish(scenario_projection_polar(polar_cfg(rc)), rc); }});

    const BusemannConfig bu;
    c.push_back({"busemann", "Busemann pairing against the inner product",
                 {{"samples", bu.samples}, {"dim", bu.dim}, {"max_norm", bu.max_norm}, {"t", bu.t}, {"tol", bu.tol}},
                 [](const RunConfig& rc) {
                   BusemannConfig cfg;
                   cfg.samples = param<int>(rc.params, "samples");
                   cfg.dim = param<int>(rc.params, "dim");
                   cfg.max_norm = param<double>(rc.params, "max_norm");
                   cfg.t = param<double>(rc.params, "t");
                   cfg.tol = param<double>(rc.params, "tol");
                   cfg.seed = rc.seed;
                   return detail::finish(scenario_busemann(cfg), rc);
                 }});

    const BasicSuiteConfig bf;
    c.push_back({"basic-functions", "support functions of orbits are basic",
                 {{"exact_tests", bf.exact_tests}, {"sampled_tests", bf.sampled_tests},
                  {"orbits_per_action", bf.orbits_per_action}, {"sampled_orbit_budget", bf.sampled_orbit_budget},
                  {"exact_tol", bf.exact_tol}, {"sampled_tol", bf.sampled_tol}},
                 [](const RunConfig& rc) {
                   BasicSuiteConfig cfg;
                   cfg.exact_tests = param<int>(rc.params, "exact_tests");
                   cfg.sampled_tests = param<int>(rc.params, "sampled_tests");
                   cfg.orbits_per_action = param<int>(rc.params, "orbits_per_action");
                   cfg.sampled_orbit_budget = param<int>(rc.params, "sampled_orbit_budget");
                   cfg.exact_tol = param<double>(rc.params, "exact_tol");
                   cfg.sampled_tol = param<double>(rc.params, "sampled_tol");
                   cfg.seed = rc.seed;
                   return detail::finish(scenario_basic_functions(cfg), rc);
                 }});

    const SlopeSuiteConfig sl;
    c.push_back({"slope-criterion", "slope detector on disk, circle and random saturated sets",
                 {{"probe_budget", sl.probe_budget}, {"per_radius_budget", sl.per_radius_budget}, {"tol", sl.tol},
                  {"random_sets", sl.random_sets}, {"suite_probe_budget", sl.suite_probe_budget},
                  {"suite_per_radius_budget", sl.suite_per_radius_budget}, {"pair_budget", sl.pair_budget}},
                 [](const RunConfig& rc) {
                   SlopeSuiteConfig cfg;
                   cfg.probe_budget = param<int>(rc.params, "probe_budget");
                   cfg.per_radius_budget = param<int>(rc.params, "per_radius_budget");
                   cfg.tol = param<double>(rc.params, "tol");
                   cfg.random_sets = param<int>(rc.params, "random_sets");
                   cfg.suite_probe_budget = param<int>(rc.params, "suite_probe_budget");
                   cfg.suite_per_radius_budget = param<int>(rc.params, "suite_per_radius_budget");
                   cfg.pair_budget = param<int>(rc.params, "pair_budget");
                   cfg.seed = rc.seed;
                   cfg.jobs = rc.jobs;
                   return detail::finish(scenario_slope_criterion(cfg), rc);
                 }});
    return c;
  }();
  return all;
}

inline const Command* find_command(const std::string& name) {
  for (const Command& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Config files and flag values

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline std::string key_anchor(const std::string& path, const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return path;
  const auto [line, col] = line_col(text, pos);
  return path + ":" + std::to_string(line) + ":" + std::to_string(col);
}

inline json parse_json_text(const std::string& path, const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " + e.what());
  }
}

/// A flag value converted to the JSON type of the parameter's default.
inline json coerce(const std::string& key, const std::string& text, const json& like) {
  try {
    if (like.is_number_integer()) {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw ConfigError("");
      return v;
    }
    if (like.is_number()) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw ConfigError("");
      return v;
    }
    if (like.is_array()) {
      if (!text.empty() && text.front() == '[') return json::parse(text);
      return text.empty() ? json::array() : json(number_list(text, key.c_str()));
    }
    if (!text.empty() && text.front() == '{') return json::parse(text);
    return text;
  } catch (const std::exception&) {
    throw ConfigError("--" + key + ": cannot use \"" + text + "\" here (expected " + like.type_name() + ")");
  }
}

inline void check_param_type(const std::string& anchor, const std::string& key, const json& value, const json& like) {
  const bool ok = like.is_number_integer() ? value.is_number_integer()
                  : like.is_number()       ? value.is_number()
                  : like.is_array()        ? value.is_array()
                  : like.is_string()       ? (value.is_string() || value.is_object())
                                           : true;
  if (!ok) throw ConfigError(anchor + ": parameter \"" + key + "\" must be " + like.type_name());
}

}  // namespace detail

/// Merges defaults, the config file and flag overrides, rejecting unknown
/// keys at every level.
inline RunConfig build_config(const Command& cmd, const std::string& config_path,
                              const std::map<std::string, std::string>& flag_params, std::optional<std::uint64_t> seed,
                              std::optional<std::string> out, std::optional<int> jobs) {
  RunConfig rc;
  rc.scenario = cmd.name;
  rc.params = cmd.defaults;
  if (const char* env = std::getenv("ORBITCVX_OUT"); env && *env) rc.output_dir = env;
  if (!config_path.empty()) {
    const std::string text = detail::read_file(config_path);
    const json j = detail::parse_json_text(config_path, text);
    if (!j.is_object()) throw ConfigError(config_path + ":1:1: config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const std::string anchor = detail::key_anchor(config_path, text, key);
      if (key == "scenario") {
        if (!value.is_string() || value.get<std::string>() != cmd.name)
          throw ConfigError(anchor + ": config is for \"" + value.dump() + "\", not \"" + cmd.name + "\"");
      } else if (key == "seed") {
        if (!value.is_number_unsigned()) throw ConfigError(anchor + ": seed must be a non-negative integer");
        rc.seed = value.get<std::uint64_t>();
      } else if (key == "output_dir") {
        if (!value.is_string()) throw ConfigError(anchor + ": output_dir must be a string");
        rc.output_dir = value.get<std::string>();
      } else if (key == "jobs") {
        if (!value.is_number_integer() || value.get<int>() < 1) throw ConfigError(anchor + ": jobs must be a positive integer");
        rc.jobs = value.get<int>();
      } else if (key == "params") {
        if (!value.is_object()) throw ConfigError(anchor + ": params must be an object");
        for (const auto& [pk, pv] : value.items()) {
          const std::string panchor = detail::key_anchor(config_path, text, pk);
          if (!cmd.defaults.contains(pk)) throw ConfigError(panchor + ": unknown parameter \"" + pk + "\" for " + cmd.name);
          detail::check_param_type(panchor, pk, pv, cmd.defaults.at(pk));
          rc.params[pk] = pv;
        }
      } else {
        throw ConfigError(anchor + ": unknown key \"" + key + "\"");
      }
    }
  }
  for (const auto& [key, text] : flag_params) rc.params[key] = detail::coerce(key, text, cmd.defaults.at(key));
  if (seed) rc.seed = *seed;
  if (out) rc.output_dir = *out;
  if (jobs) {
    if (*jobs < 1) throw ConfigError("--jobs must be a positive integer");
    rc.jobs = *jobs;
  }
  return rc;
}

// ---------------------------------------------------------------------------
// report

inline Outcome run_report(const std::vector<std::string>& files, std::optional<std::string> out) {
  if (files.empty()) throw ConfigError("report: no input files");
  std::ostringstream csv;
  csv << "file,scenario_id,status,verdict,seed,metrics,failing,first_failing\n";
  Outcome o;
  bool all_pass = true;
  int reports = 0;
  for (const std::string& f : files) {
    const json j = detail::parse_json_text(f, detail::read_file(f));
    if (!j.is_object() || !j.contains("scenario_id") || !j.contains("status") || !j.contains("metrics")) {
      o.errors.push_back(f + ": skipped, not a verification report");
      continue;
    }
    ++reports;
    const std::string status = j.at("status").get<std::string>();
    all_pass = all_pass && status == "pass";
    std::size_t failing = 0;
    std::string first;
    for (const auto& m : j.at("metrics"))
      if (!m.value("ok", false)) {
        if (failing++ == 0) first = m.value("name", std::string());
      }
    std::uint64_t seed = 0;
    if (j.contains("config") && j["config"].contains("seed")) seed = j["config"]["seed"].get<std::uint64_t>();
    csv << std::filesystem::path(f).filename().string() << ',' << j.at("scenario_id").get<std::string>() << ',' << status << ','
        << j.value("verdict", std::string()) << ',' << seed << ',' << j.at("metrics").size() << ',' << failing << ',' << first
        << '\n';
    o.lines.push_back(status + " " + j.at("scenario_id").get<std::string>() + " " + j.value("verdict", std::string()) +
                      (first.empty() ? "" : " failing=" + first));
    if (!first.empty()) o.errors.push_back(f + ": failing metric " + first);
  }
  if (reports == 0) throw ConfigError("report: none of the inputs is a verification report");
  const std::filesystem::path dir = out.value_or(std::getenv("ORBITCVX_OUT") ? std::getenv("ORBITCVX_OUT") : "out");
  std::filesystem::create_directories(dir);
  write_text(dir / "summary.csv", csv.str());
  o.lines.push_back("wrote " + (dir / "summary.csv").string());
  o.exit_code = all_pass ? 0 : 1;
  return o;
}

// ---------------------------------------------------------------------------
// Entry point

inline std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& ch : s)
    if (ch == '_') ch = '-';
  return s;
}

struct LeafOptions {
  std::string config;
  std::map<std::string, std::string> values;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
};

inline void add_leaf(CLI::App* app, const Command& cmd, LeafOptions& opts) {
  app->add_option("--config", opts.config, "JSON run configuration");
  app->add_option("--seed", opts.seed, "64-bit seed (default " + std::to_string(kDefaultSeed) + ")");
  app->add_option("--out", opts.out, "output directory (default $ORBITCVX_OUT or ./out)");
  app->add_option("--jobs", opts.jobs, "worker threads");
  for (const auto& [key, value] : cmd.defaults.items()) {
    const std::string k = key;
    app->add_option_function<std::string>("--" + flag_name(k), [&opts, k](const std::string& v) { opts.values[k] = v; },
                                          "default " + value.dump());
  }
}

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Convexity of orbits and saturated sets: orbit sampling, slope detection and scenario verification"};
  app.require_subcommand(1);
  std::map<std::string, LeafOptions> leaf_opts;
  std::vector<std::pair<CLI::App*, const Command*>> leaves;

  CLI::App* verify = app.add_subcommand("verify", "run a verification scenario");
  verify->require_subcommand(1);
  for (const Command& c : commands()) {
    const bool top = c.name == "orbit" || c.name == "slope" || c.name == "detect";
    CLI::App* sub = (top ? &app : verify)->add_subcommand(c.name, c.summary);
    add_leaf(sub, c, leaf_opts[c.name]);
    leaves.emplace_back(sub, &c);
  }
  std::vector<std::string> report_files;
  std::optional<std::string> report_out;
  CLI::App* report = app.add_subcommand("report", "summarize JSON reports into summary.csv");
  report->add_option("files", report_files, "report JSON files")->required();
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    Outcome o;
    if (report->parsed()) {
      o = run_report(report_files, report_out);
    } else {
      for (const auto& [sub, cmd] : leaves) {
        if (!sub->parsed()) continue;
        const LeafOptions& lo = leaf_opts[cmd->name];
        o = cmd->run(build_config(*cmd, lo.config, lo.values, lo.seed, lo.out, lo.jobs));
        break;
      }
    }
    for (const std::string& l : o.lines) out << l << '\n';
    for (const std::string& l : o.errors) err << l << '\n';
    return o.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace orbitcvx::cli

#endif  // ORBITCVX_CLI_HPP
