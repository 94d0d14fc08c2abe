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

// JSON serialization of the module reports. Every top-level document carries
// "schema_version" and "kind".

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "warptube/classifier.hpp"
#include "warptube/geometry.hpp"
#include "warptube/lyapunov.hpp"
#include "warptube/simulator.hpp"

namespace warptube {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

namespace detail {

// JSON has no infinities; they go out as strings.
inline Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json header(const std::string& kind) {
  return {{"schema_version", kSchemaVersion}, {"kind", kind}};
}

}  // namespace detail

inline Json to_json(const ConvergenceVerdict& v) {
  return {{"kind", to_string(v.kind)},
          {"has_value", v.has_value},
          {"value_estimate", detail::num(v.value_estimate)},
          {"log_value_estimate", detail::num(v.log_value_estimate)},
          {"window_ratios", detail::nums(v.window_ratios)},
          {"log_windows", detail::nums(v.log_windows)},
          {"s0", v.s0},
          {"horizon", v.horizon}};
}

inline Json to_json(const HypothesisAudit& a) {
  Json pw = Json::array();
  for (const auto& e : a.pointwise) {
    pw.push_back({{"id", e.id},
                  {"quantity", e.quantity},
                  {"rule", to_string(e.rule)},
                  {"passed", e.passed},
                  {"detail", e.detail},
                  {"s", detail::nums(e.s)},
                  {"values", detail::nums(e.values)}});
  }
  Json in = Json::array();
  for (const auto& e : a.integral) {
    in.push_back({{"id", e.id},
                  {"quantity", e.quantity},
                  {"passed", e.passed},
                  {"detail", e.detail},
                  {"verdict", to_json(e.verdict)}});
  }
  return {{"overall", to_string(a.overall)}, {"failures", a.failures}, {"s0", a.s0},
          {"horizon", a.horizon}, {"pointwise", pw}, {"integral", in}};
}

inline Json domain_json(const TubeDomain& d) {
  return {{"label", d.label},
          {"p", d.p()},
          {"q", d.q()},
          {"theta", d.model.theta.label()},
          {"phi", d.model.phi.label()},
          {"xi", d.model.xi.label()},
          {"f", d.f.label()},
          {"s_start", d.s_start}};
}

inline Json classification_json(const TubeDomain& d, const ClassificationReport& r) {
  Json j = detail::header("classification");
  j["domain"] = domain_json(d);
  j["verdict"] = to_string(r.verdict);
  j["s0"] = r.s0;
  j["horizon"] = r.horizon;
  j["note"] = r.note;
  j["I_verdict"] = to_json(r.I_verdict);
  j["audit"] = to_json(r.audit);
  return j;
}

inline Json audit_json(const TubeDomain& d, const HypothesisAudit& a) {
  Json j = detail::header("audit");
  j["domain"] = domain_json(d);
  j["audit"] = to_json(a);
  return j;
}

inline Json volume_json(const VolumeReport& v) {
  return {{"verdict", to_string(v.verdict)},
          {"value", detail::num(v.value)},
          {"log_value", detail::num(v.log_value)},
          {"windows", to_json(v.windows)}};
}

inline Json scan_json(const std::string& family, const ScanResult& s) {
  Json j = detail::header("scan");
  j["family"] = family;
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"alpha", r.alpha},
                    {"verdict", to_string(r.verdict)},
                    {"I_kind", to_string(r.I_kind)},
                    {"audit", to_string(r.audit)}});
  }
  j["rows"] = rows;
  j["has_cutoff"] = s.has_cutoff;
  j["cutoff"] = s.has_cutoff ? Json(s.cutoff) : Json(nullptr);
  return j;
}

inline Json to_json(const KConstants& k) {
  return {{"K", detail::nums({k.K.begin(), k.K.end()})},
          {"sup_ratio", detail::nums({k.sup_ratio.begin(), k.sup_ratio.end()})}};
}

struct LyapunovVerifyResult {
  double s0 = 0.0;
  double s_max = 0.0;
  int s_points = 0;
  int r_points = 0;
  SandwichReport sandwich;
  SignReport sign;
  AsymptoticReport asymptotic;
  KConstants table_K;
};

inline Json lyapunov_json(const TubeDomain& d, const LyapunovVerifyResult& r) {
  Json j = detail::header("lyapunov_verify");
  j["domain"] = domain_json(d);
  j["s0"] = r.s0;
  j["s_max"] = r.s_max;
  j["s_points"] = r.s_points;
  j["r_points"] = r.r_points;
  j["sandwich"] = {{"max_lower_violation", detail::num(r.sandwich.max_lower_violation)},
                   {"max_upper_violation", detail::num(r.sandwich.max_upper_violation)},
                   {"worst_excess", detail::num(r.sandwich.worst_excess)},
                   {"worst_s", r.sandwich.worst_s},
                   {"worst_r", r.sandwich.worst_r},
                   {"points", r.sandwich.points},
                   {"violations", r.sandwich.violations},
                   {"passed", r.sandwich.passed},
                   {"K", to_json(r.sandwich.K)}};
  j["sign"] = {{"max_laplacian_plus", detail::num(r.sign.max_laplacian_plus)},
               {"min_laplacian_minus", detail::num(r.sign.min_laplacian_minus)},
               {"max_scaled_plus", detail::num(r.sign.max_scaled_plus)},
               {"min_scaled_minus", detail::num(r.sign.min_scaled_minus)},
               {"min_A", detail::num(r.sign.min_A)},
               {"min_dpsi_plus", detail::num(r.sign.min_dpsi_plus)},
               {"min_dpsi_minus", detail::num(r.sign.min_dpsi_minus)},
               {"passed", r.sign.passed}};
  j["asymptotic"] = {{"deviation_plus", detail::num(r.asymptotic.deviation_plus)},
                     {"deviation_minus", detail::num(r.asymptotic.deviation_minus)}};
  j["table_K"] = to_json(r.table_K);
  j["note"] =
      "B/A is evaluated in the form checked against a finite-difference orbit Laplacian";
  return j;
}

inline Json to_json(const ExitStats& s) {
  return {{"p_hit_b_first", s.p_hit_b_first},
          {"stderr", s.stderr},
          {"n_censored", s.n_censored},
          {"n_eff", s.n_eff},
          {"n_paths", s.n_paths},
          {"a", s.a},
          {"b", s.b},
          {"s0", s.s0},
          {"r0", s.r0},
          {"dt", s.dt},
          {"mean_exit_time", s.mean_exit_time},
          {"mean_reflections", s.mean_reflections},
          {"reflection_mode", to_string(s.mode)}};
}

inline Json simulation_json(const TubeDomain& d, const ExitStats& s, std::uint64_t seed,
                            const ExitBounds* bounds) {
  Json j = detail::header("simulation");
  j["domain"] = domain_json(d);
  j["master_seed"] = seed;
  j["stats"] = to_json(s);
  if (bounds) {
    j["lyapunov_bounds"] = {{"lower", bounds->lower},
                            {"upper", bounds->upper},
                            {"f_discrepancy", bounds->f_discrepancy}};
  } else {
    j["lyapunov_bounds"] = nullptr;
  }
  return j;
}

inline Json recurrence_scan_json(const TubeDomain& d, const RecurrenceScan& r) {
  Json j = detail::header("recurrence_scan");
  j["domain"] = domain_json(d);
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"b", row.b}, {"stats", to_json(row.stats)}});
  j["rows"] = rows;
  j["diagnostic"] = r.diagnostic;
  j["label"] = "diagnostic";
  return j;
}

}  // namespace warptube
