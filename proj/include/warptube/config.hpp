/*
   Copyright 2026 The warptube Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Run configuration for the command-line tool. JSON, unknown keys rejected,
// errors addressed by line.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "warptube/classifier.hpp"
#include "warptube/error.hpp"
#include "warptube/geometry.hpp"
#include "warptube/profiles.hpp"
#include "warptube/simulator.hpp"

namespace warptube {

inline constexpr int kConfigSchemaVersion = 1;

struct DomainConfig {
  int p = 2;
  int q = 1;
  std::string theta = "linear";
  std::string phi = "const(1)";
  std::string xi = "linear";
  std::string f = "const(1)";
  double s_start = 0.0;
  double table_s_max = 1000.0;  // range of tabulated (Schwarzschild) profiles
};

struct ClassifierConfig {
  std::optional<double> s0;
  std::optional<double> horizon;
  WindowThresholds thresholds;
};

struct LyapunovConfig {
  std::optional<double> s0;  // default: chart rule from s_start + 1
  std::optional<double> s_max;
  int s_points = 40;
  int r_points = 64;
  double tolerance = 1e-6;
};

struct SimSection {
  SimConfig sim;
  double s0 = 2.0;
  double r0 = 0.0;
  double a = 1.0;
  double b = 4.0;
  std::vector<double> b_list;  // non-empty: recurrence scan
  bool records = false;        // per-path CSV
  bool bounds = false;         // attach Lyapunov exit bounds
};

struct ScanConfig {
  std::string f_family = "power";  // power | exp
  double alpha_min = -2.0;
  double alpha_max = 0.9;
  double alpha_step = 0.1;
};

struct ProfileBuildConfig {
  double m = 0.5;
  int eps = 0;
  int p = 3;
  double s_max = 100.0;
  int points = 201;
};

struct OutputConfig {
  std::string dir = ".";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  DomainConfig domain;
  ClassifierConfig classifier;
  LyapunovConfig lyapunov;
  SimSection sim;
  ScanConfig scan;
  ProfileBuildConfig profile_build;
  OutputConfig output;
};

namespace detail {

/// Line of the first occurrence of "key" after the occurrences of each
/// enclosing key in turn. 0 when not found.
inline int line_of(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& k : path) {
    const auto hit = text.find("\"" + k + "\"", pos);
    if (hit == std::string::npos) return 0;
    pos = hit + 1;
  }
  if (pos == 0) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class ConfigReader {
 public:
  explicit ConfigReader(std::string text) : text_(std::move(text)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string dotted;
    for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
    throw ConfigError(dotted + ": " + what, line_of(text_, path));
  }

  void only(const nlohmann::json& obj, const std::vector<std::string>& path,
            const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
    }
  }

  double number(const nlohmann::json& obj, const std::vector<std::string>& path,
                const std::string& key, double def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_number()) fail(p, "expected a number");
    return v.get<double>();
  }

  long long integer(const nlohmann::json& obj, const std::vector<std::string>& path,
                    const std::string& key, long long def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_number_integer()) fail(p, "expected an integer");
    return v.get<long long>();
  }

  std::string string(const nlohmann::json& obj, const std::vector<std::string>& path,
                     const std::string& key, const std::string& def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_string()) fail(p, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const nlohmann::json& obj, const std::vector<std::string>& path,
               const std::string& key, bool def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_boolean()) fail(p, "expected true or false");
    return v.get<bool>();
  }

  void check(bool ok, const std::vector<std::string>& path, const std::string& what) const {
    if (!ok) fail(path, what);
  }

 private:
  std::string text_;
};

}  // namespace detail

/// Parses and validates a configuration document.
inline RunConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte > 0 ? byte - 1 : 0), '\n'));
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line);
  }
  detail::ConfigReader rd(text);
  RunConfig cfg;
  rd.only(root, {}, {"schema_version", "domain", "classifier", "lyapunov", "sim", "scan",
                     "profile_build", "output"});
  if (root.contains("schema_version")) {
    rd.check(root["schema_version"] == kConfigSchemaVersion, {"schema_version"},
             "unsupported schema version");
  }

  if (root.contains("domain")) {
    const auto& d = root["domain"];
    const std::vector<std::string> P{"domain"};
    rd.only(d, P, {"p", "q", "theta", "phi", "xi", "f", "s_start", "table_s_max"});
    auto& c = cfg.domain;
    c.p = static_cast<int>(rd.integer(d, P, "p", c.p));
    c.q = static_cast<int>(rd.integer(d, P, "q", c.q));
    c.theta = rd.string(d, P, "theta", c.theta);
    c.phi = rd.string(d, P, "phi", c.phi);
    c.xi = rd.string(d, P, "xi", c.xi);
    c.f = rd.string(d, P, "f", c.f);
    c.s_start = rd.number(d, P, "s_start", c.s_start);
    c.table_s_max = rd.number(d, P, "table_s_max", c.table_s_max);
    rd.check(c.p >= 2, {"domain", "p"}, "p must be at least 2");
    rd.check(c.q >= 1, {"domain", "q"}, "q must be at least 1");
    rd.check(c.s_start >= 0.0, {"domain", "s_start"}, "s_start must be nonnegative");
    rd.check(c.table_s_max > 1.0, {"domain", "table_s_max"}, "table_s_max must exceed 1");
    const std::pair<const char*, const std::string*> ids[] = {
        {"theta", &c.theta}, {"phi", &c.phi}, {"xi", &c.xi}, {"f", &c.f}};
    for (const auto& [key, id] : ids) {
      try {
        parse_profile(*id, c.table_s_max);
      } catch (const Error& e) {
        rd.fail({"domain", key}, e.what());
      }
    }
  }

  if (root.contains("classifier")) {
    const auto& c = root["classifier"];
    const std::vector<std::string> P{"classifier"};
    rd.only(c, P, {"s0", "horizon", "thresholds"});
    if (c.contains("s0")) cfg.classifier.s0 = rd.number(c, P, "s0", 1.0);
    if (c.contains("horizon")) cfg.classifier.horizon = rd.number(c, P, "horizon", 1.0);
    if (cfg.classifier.s0) rd.check(*cfg.classifier.s0 > 0.0, {"classifier", "s0"}, "s0 must be positive");
    if (cfg.classifier.horizon) {
      const double s0 = cfg.classifier.s0.value_or(1.0);
      rd.check(*cfg.classifier.horizon >= 16.0 * s0, {"classifier", "horizon"},
               "horizon must be at least 16 s0");
    }
    if (c.contains("thresholds")) {
      const auto& t = c["thresholds"];
      const std::vector<std::string> T{"classifier", "thresholds"};
      rd.only(t, T, {"convergent_max", "divergent_min", "tail_windows"});
      auto& th = cfg.classifier.thresholds;
      th.convergent_max = rd.number(t, T, "convergent_max", th.convergent_max);
      th.divergent_min = rd.number(t, T, "divergent_min", th.divergent_min);
      th.tail_windows = static_cast<int>(rd.integer(t, T, "tail_windows", th.tail_windows));
      rd.check(th.convergent_max > 0.0 && th.convergent_max < th.divergent_min, {"classifier", "thresholds", "convergent_max"},
               "need 0 < convergent_max < divergent_min");
      rd.check(th.tail_windows >= 1, {"classifier", "thresholds", "tail_windows"},
               "tail_windows must be at least 1");
    }
  }

  if (root.contains("lyapunov")) {
    const auto& l = root["lyapunov"];
    const std::vector<std::string> P{"lyapunov"};
    rd.only(l, P, {"s0", "s_max", "s_points", "r_points", "tolerance"});
    auto& c = cfg.lyapunov;
    if (l.contains("s0")) c.s0 = rd.number(l, P, "s0", 1.0);
    if (l.contains("s_max")) c.s_max = rd.number(l, P, "s_max", 1.0);
    c.s_points = static_cast<int>(rd.integer(l, P, "s_points", c.s_points));
    c.r_points = static_cast<int>(rd.integer(l, P, "r_points", c.r_points));
    c.tolerance = rd.number(l, P, "tolerance", c.tolerance);
    if (c.s0) rd.check(*c.s0 > cfg.domain.s_start, {"lyapunov", "s0"}, "s0 must exceed s_start");
    if (c.s_max && c.s0) rd.check(*c.s_max > *c.s0, {"lyapunov", "s_max"}, "s_max must exceed s0");
    rd.check(c.s_points >= 2, {"lyapunov", "s_points"}, "s_points must be at least 2");
    rd.check(c.r_points >= 2, {"lyapunov", "r_points"}, "r_points must be at least 2");
    rd.check(c.tolerance > 0.0, {"lyapunov", "tolerance"}, "tolerance must be positive");
  }

  if (root.contains("sim")) {
    const auto& s = root["sim"];
    const std::vector<std::string> P{"sim"};
    rd.only(s, P, {"dt", "n_paths", "master_seed", "t_max", "reflection_mode", "r_floor_mode",
                   "s_floor", "workers", "bridge_correction", "s0", "r0", "a", "b", "b_list",
                   "records", "bounds"});
    auto& c = cfg.sim;
    c.sim.dt = rd.number(s, P, "dt", c.sim.dt);
    c.sim.n_paths = rd.integer(s, P, "n_paths", c.sim.n_paths);
    if (s.contains("master_seed")) {
      rd.check(s["master_seed"].is_number_unsigned() || s["master_seed"].is_number_integer(),
               {"sim", "master_seed"}, "expected a nonnegative integer");
      rd.check(!(s["master_seed"].is_number_integer() && s["master_seed"].get<long long>() < 0),
               {"sim", "master_seed"}, "expected a nonnegative integer");
      c.sim.master_seed = s["master_seed"].get<std::uint64_t>();
    }
    c.sim.t_max = rd.number(s, P, "t_max", c.sim.t_max);
    const auto mode = rd.string(s, P, "reflection_mode", to_string(c.sim.reflection_mode));
    if (mode == "Projection") {
      c.sim.reflection_mode = ReflectionMode::Projection;
    } else if (mode == "LevelChart") {
      c.sim.reflection_mode = ReflectionMode::LevelChart;
    } else {
      rd.fail({"sim", "reflection_mode"}, "expected Projection or LevelChart");
    }
    rd.check(rd.string(s, P, "r_floor_mode", "Mirror") == "Mirror", {"sim", "r_floor_mode"},
             "only Mirror is supported");
    c.sim.s_floor = rd.number(s, P, "s_floor", c.sim.s_floor);
    const auto workers = rd.integer(s, P, "workers", 0);
    rd.check(workers >= 0, {"sim", "workers"}, "workers must be nonnegative");
    c.sim.workers = static_cast<unsigned>(workers);
    c.sim.bridge_correction = rd.boolean(s, P, "bridge_correction", c.sim.bridge_correction);
    c.s0 = rd.number(s, P, "s0", c.s0);
    c.r0 = rd.number(s, P, "r0", c.r0);
    c.a = rd.number(s, P, "a", c.a);
    c.b = rd.number(s, P, "b", c.b);
    c.records = rd.boolean(s, P, "records", c.records);
    c.bounds = rd.boolean(s, P, "bounds", c.bounds);
    if (s.contains("b_list")) {
      rd.check(s["b_list"].is_array(), {"sim", "b_list"}, "expected an array of numbers");
      for (const auto& v : s["b_list"]) {
        rd.check(v.is_number(), {"sim", "b_list"}, "expected an array of numbers");
        c.b_list.push_back(v.get<double>());
      }
      for (std::size_t i = 1; i < c.b_list.size(); ++i) {
        rd.check(c.b_list[i] > c.b_list[i - 1], {"sim", "b_list"}, "b_list must increase");
      }
      if (!c.b_list.empty()) rd.check(c.b_list.front() > c.s0, {"sim", "b_list"}, "b_list entries must exceed s0");
    }
    rd.check(c.sim.dt > 0.0 && c.sim.dt <= 1e-2, {"sim", "dt"}, "dt must lie in (0, 1e-2]");
    rd.check(c.sim.n_paths >= 1, {"sim", "n_paths"}, "n_paths must be at least 1");
    rd.check(c.sim.t_max > 0.0, {"sim", "t_max"}, "t_max must be positive");
    rd.check(c.sim.s_floor >= 0.0, {"sim", "s_floor"}, "s_floor must be nonnegative");
    rd.check(c.a >= cfg.domain.s_start, {"sim", "a"}, "a must be at least s_start");
    rd.check(c.a < c.s0, {"sim", "s0"}, "need a < s0");
    rd.check(c.s0 < c.b, {"sim", "b"}, "need s0 < b");
    rd.check(c.r0 >= 0.0, {"sim", "r0"}, "r0 must be nonnegative");
  }

  if (root.contains("scan")) {
    const auto& s = root["scan"];
    const std::vector<std::string> P{"scan"};
    rd.only(s, P, {"f_family", "alpha_min", "alpha_max", "alpha_step"});
    auto& c = cfg.scan;
    c.f_family = rd.string(s, P, "f_family", c.f_family);
    c.alpha_min = rd.number(s, P, "alpha_min", c.alpha_min);
    c.alpha_max = rd.number(s, P, "alpha_max", c.alpha_max);
    c.alpha_step = rd.number(s, P, "alpha_step", c.alpha_step);
    rd.check(c.f_family == "power" || c.f_family == "exp", {"scan", "f_family"},
             "expected power or exp");
    rd.check(c.alpha_step > 0.0, {"scan", "alpha_step"}, "alpha_step must be positive");
    rd.check(c.alpha_max >= c.alpha_min, {"scan", "alpha_max"}, "alpha_max must be >= alpha_min");
    rd.check((c.alpha_max - c.alpha_min) / c.alpha_step <= 10000, {"scan", "alpha_step"},
             "too many scan points");
  }

  if (root.contains("profile_build")) {
    const auto& s = root["profile_build"];
    const std::vector<std::string> P{"profile_build"};
    rd.only(s, P, {"m", "eps", "p", "s_max", "points"});
    auto& c = cfg.profile_build;
    c.m = rd.number(s, P, "m", c.m);
    c.eps = static_cast<int>(rd.integer(s, P, "eps", c.eps));
    c.p = static_cast<int>(rd.integer(s, P, "p", c.p));
    c.s_max = rd.number(s, P, "s_max", c.s_max);
    c.points = static_cast<int>(rd.integer(s, P, "points", c.points));
    rd.check(c.m > 0.0, {"profile_build", "m"}, "m must be positive");
    rd.check(c.eps == 0 || c.eps == -1, {"profile_build", "eps"}, "eps must be 0 or -1");
    rd.check(c.p >= 3, {"profile_build", "p"}, "p must be at least 3");
    rd.check(c.s_max > 0.0, {"profile_build", "s_max"}, "s_max must be positive");
    rd.check(c.points >= 2, {"profile_build", "points"}, "points must be at least 2");
  }

  if (root.contains("output")) {
    const auto& o = root["output"];
    const std::vector<std::string> P{"output"};
    rd.only(o, P, {"dir", "formats"});
    cfg.output.dir = rd.string(o, P, "dir", cfg.output.dir);
    if (o.contains("formats")) {
      rd.check(o["formats"].is_array(), {"output", "formats"}, "expected an array");
      cfg.output.json = cfg.output.csv = false;
      for (const auto& v : o["formats"]) {
        if (v == "JSON") {
          cfg.output.json = true;
        } else if (v == "CSV") {
          cfg.output.csv = true;
        } else {
          rd.fail({"output", "formats"}, "formats are JSON and CSV");
        }
      }
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Builds the tube domain described by the domain block.
inline TubeDomain make_domain(const DomainConfig& c) {
  TubeDomain d;
  d.model.p = c.p;
  d.model.q = c.q;
  d.model.theta = parse_profile(c.theta, c.table_s_max);
  d.model.phi = parse_profile(c.phi, c.table_s_max);
  d.model.xi = parse_profile(c.xi, c.table_s_max);
  d.f = parse_profile(c.f, c.table_s_max);
  d.s_start = c.s_start;
  d.label = "domain(p=" + std::to_string(c.p) + ",q=" + std::to_string(c.q) + ",theta=" + c.theta +
            ",phi=" + c.phi + ",xi=" + c.xi + ",f=" + c.f + ")";
  return d;
}

}  // namespace warptube
