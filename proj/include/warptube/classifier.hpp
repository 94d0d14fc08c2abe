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

// Integral test, hypothesis audit and the resulting verdict. All checks are
// heuristics at a finite horizon; reports carry that horizon.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "warptube/convergence.hpp"
#include "warptube/error.hpp"
#include "warptube/geometry.hpp"

namespace warptube {

/// theta^(1-p) phi^(-q) xi(f)^(-q).
inline double integrand_I(const TubeDomain& dom, double s) {
  const auto& m = dom.model;
  return std::pow(m.theta(s), 1 - m.p) * std::pow(m.phi(s), -m.q) *
         std::pow(dom.xi_f(s), -m.q);
}

inline double log_integrand_I(const TubeDomain& dom, double s) {
  const auto& m = dom.model;
  return (1 - m.p) * m.theta.log_value(s) - m.q * m.phi.log_value(s) -
         m.q * m.xi.log_value(dom.f(s));
}

// ---------------------------------------------------------------------------
// Horizon selection.

namespace detail {

inline bool log_in_range(double v, double bound) {
  if (v == 0.0) return true;
  if (!std::isfinite(v)) return false;
  return std::abs(std::log(std::abs(v))) <= bound;
}

/// True when every profile value entering the audit is comfortably inside
/// the double range at s.
inline bool representable_at(const TubeDomain& dom, double s) {
  try {
    const auto& m = dom.model;
    constexpr double kBound = 700.0;
    if (std::abs(m.theta.log_value(s)) > kBound) return false;
    if (std::abs(m.phi.log_value(s)) > 0.5 * kBound) return false;
    if (std::abs(dom.f.log_value(s)) > kBound) return false;
    const double fv = dom.f(s);
    if (std::abs(m.xi.log_value(fv)) > kBound) return false;
    for (double v : {m.theta.d1(s), m.phi.d1(s), dom.f.d1(s), dom.f.d2(s), m.xi.d1(fv),
                     m.xi.d2(fv)}) {
      if (!log_in_range(v, kBound)) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

/// Largest s in [s0, s_hi] up to which the domain stays representable,
/// probed on a grid of ratio 2^(1/8).
inline double representable_limit(const TubeDomain& dom, double s0, double s_hi) {
  s_hi = std::min(s_hi, dom.s_end());
  double last_ok = s0;
  const double step = std::pow(2.0, 0.125);
  for (double s = s0; s <= s_hi * (1 + 1e-12); s *= step) {
    if (!detail::representable_at(dom, s)) return last_ok;
    last_ok = s;
  }
  return detail::representable_at(dom, s_hi) ? s_hi : last_ok;
}

struct Window {
  double s0 = 1.0;
  double horizon = 1048576.0;
};

/// Default window: s0 = 1 (or s_start + 1) and the largest s0 * 2^k, k <= 48,
/// inside the representable range. When fewer than five doublings fit, s0 is
/// moved left to limit / 32 if the domain allows it. Throws DomainError when
/// fewer than four doublings fit.
inline Window default_window(const TubeDomain& dom, int max_doublings = 48) {
  Window w;
  w.s0 = dom.s_start > 0.0 ? dom.s_start + 1.0 : 1.0;
  const double limit =
      representable_limit(dom, w.s0, w.s0 * std::ldexp(1.0, max_doublings));
  int k = static_cast<int>(std::floor(std::log2(limit / w.s0) + 1e-12));
  k = std::min(k, max_doublings);
  if (k < 5 && limit / 32.0 > dom.s_start) {
    w.s0 = limit / 32.0;
    k = 5;
  }
  if (k < 4) {
    throw DomainError("representable range of " + dom.label +
                      " is shorter than four doublings");
  }
  w.horizon = std::ldexp(w.s0, k);
  return w;
}

// ---------------------------------------------------------------------------
// Hypothesis audit.

enum class TrendRule { ToZero, ToOne, Bounded, LittleO };

inline const char* to_string(TrendRule r) {
  switch (r) {
    case TrendRule::ToZero: return "-> 0";
    case TrendRule::ToOne: return "-> 1";
    case TrendRule::Bounded: return "O(1)";
    default: return "o(s)";
  }
}

struct AuditTolerances {
  double limit_tol = 0.05;     // "-> c": distance to c over the last 8 samples
  double bounded_factor = 10;  // "O(1)": growth allowed over early samples
  double little_o = 0.05;      // "o(s)": final bound on |value| / s
  double grid_ratio = 1.189207115002721;  // 2^(1/4)
};

struct PointwiseEntry {
  std::string id;
  std::string quantity;
  TrendRule rule = TrendRule::ToZero;
  std::vector<double> s;
  std::vector<double> values;
  bool passed = false;
  std::string detail;
};

struct IntegralEntry {
  std::string id;
  std::string quantity;
  ConvergenceVerdict verdict;
  bool passed = false;
  std::string detail;
};

enum class AuditOverall { Pass, Fail, Inconclusive };

inline const char* to_string(AuditOverall o) {
  switch (o) {
    case AuditOverall::Pass: return "Pass";
    case AuditOverall::Fail: return "Fail";
    default: return "Inconclusive";
  }
}

struct HypothesisAudit {
  std::vector<PointwiseEntry> pointwise;
  std::vector<IntegralEntry> integral;
  AuditOverall overall = AuditOverall::Inconclusive;
  std::vector<std::string> failures;
  double s0 = 0.0;
  double horizon = 0.0;

  bool passed(const std::string& id) const {
    for (const auto& e : pointwise) if (e.id == id) return e.passed;
    for (const auto& e : integral) if (e.id == id) return e.passed;
    return false;
  }
};

namespace detail {

/// Max of |values[i]| - target over samples with s in (hi / 2^(j+1), hi / 2^j].
inline double octave_max(const std::vector<double>& s, const std::vector<double>& v,
                         int j, const std::function<double(double, double)>& dev) {
  const double top = s.back() / std::ldexp(1.0, j);
  const double bottom = top / 2.0;
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > bottom * (1 + 1e-12) && s[i] <= top * (1 + 1e-12)) {
      m = std::max(m, dev(s[i], v[i]));
    }
  }
  return m;
}

inline bool nonincreasing(double older, double newer) {
  return newer <= older * (1.0 + 1e-9) + 1e-14;
}

inline void judge_limit(PointwiseEntry& e, double c, const AuditTolerances& tol) {
  const std::size_t n = e.values.size();
  const std::size_t tail = std::min<std::size_t>(8, n);
  double worst = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) worst = std::max(worst, std::abs(e.values[i] - c));
  auto dev = [c](double, double v) { return std::abs(v - c); };
  const double m0 = octave_max(e.s, e.values, 0, dev);
  const double m1 = octave_max(e.s, e.values, 1, dev);
  const double m2 = octave_max(e.s, e.values, 2, dev);
  const bool monotone = nonincreasing(m2, m1) && nonincreasing(m1, m0);
  e.passed = worst <= tol.limit_tol && monotone;
  e.detail = "max deviation over last 8 samples " + std::to_string(worst) +
             (monotone ? "" : "; deviation not shrinking over the last 3 octaves");
}

inline void judge_bounded(PointwiseEntry& e, const AuditTolerances& tol) {
  const std::size_t n = e.values.size();
  const std::size_t early = std::max<std::size_t>(1, n / 4);
  std::vector<double> head;
  for (std::size_t i = 0; i < early; ++i) head.push_back(std::abs(e.values[i]));
  std::nth_element(head.begin(), head.begin() + head.size() / 2, head.end());
  const double median = head[head.size() / 2];
  double later = 0.0;
  for (std::size_t i = early; i < n; ++i) later = std::max(later, std::abs(e.values[i]));
  e.passed = later <= tol.bounded_factor * median;
  e.detail = "max |value| after the first quarter " + std::to_string(later) +
             ", early median " + std::to_string(median);
}

inline void judge_little_o(PointwiseEntry& e, const AuditTolerances& tol) {
  auto dev = [](double s, double v) { return std::abs(v) / s; };
  const double m0 = octave_max(e.s, e.values, 0, dev);
  const double m1 = octave_max(e.s, e.values, 1, dev);
  const double m2 = octave_max(e.s, e.values, 2, dev);
  const bool monotone = nonincreasing(m2, m1) && nonincreasing(m1, m0);
  e.passed = monotone && m0 < tol.little_o;
  e.detail = "max |value|/s over the last octave " + std::to_string(m0) +
             (monotone ? "" : "; ratio not decreasing");
}

}  // namespace detail

/// Audits the six pointwise and five integral hypotheses on [s0, horizon].
inline HypothesisAudit hypothesis_audit(const TubeDomain& dom, double s0, double horizon,
                                        const WindowThresholds& thr = {},
                                        const AuditTolerances& tol = {}) {
  if (!(s0 > dom.s_start)) throw DomainError("audit start must exceed s_start");
  const auto& m = dom.model;
  HypothesisAudit audit;
  audit.s0 = s0;
  audit.horizon = horizon;
  const auto grid = geometric_grid(s0, horizon, tol.grid_ratio);

  struct PointSpec {
    const char* id;
    const char* quantity;
    TrendRule rule;
    std::function<double(double)> fn;
  };
  const std::vector<PointSpec> pspecs = {
      {"P1", "phi^2 xi(f) f''", TrendRule::ToZero,
       [&](double s) { const double ph = m.phi(s); return ph * ph * dom.xi_f(s) * dom.f.d2(s); }},
      {"P2", "phi f'", TrendRule::ToZero, [&](double s) { return m.phi(s) * dom.f.d1(s); }},
      {"P3", "phi' xi(f)", TrendRule::Bounded,
       [&](double s) { return m.phi.d1(s) * dom.xi_f(s); }},
      {"P4", "xi'(f)", TrendRule::ToOne, [&](double s) { return dom.xidot_f(s); }},
      {"P5", "phi^2 xi(f) f'", TrendRule::LittleO,
       [&](double s) { const double ph = m.phi(s); return ph * ph * dom.xi_f(s) * dom.f.d1(s); }},
      {"P6", "xi(f) xi''(f)", TrendRule::Bounded,
       [&](double s) { return dom.xi_f(s) * dom.xiddot_f(s); }},
  };
  for (const auto& spec : pspecs) {
    PointwiseEntry e;
    e.id = spec.id;
    e.quantity = spec.quantity;
    e.rule = spec.rule;
    bool finite = true;
    for (double s : grid) {
      const double v = spec.fn(s);
      if (!std::isfinite(v)) finite = false;
      e.s.push_back(s);
      e.values.push_back(v);
    }
    if (!finite) {
      e.passed = false;
      e.detail = "non-finite samples";
    } else {
      switch (spec.rule) {
        case TrendRule::ToZero: detail::judge_limit(e, 0.0, tol); break;
        case TrendRule::ToOne: detail::judge_limit(e, 1.0, tol); break;
        case TrendRule::Bounded: detail::judge_bounded(e, tol); break;
        case TrendRule::LittleO: detail::judge_little_o(e, tol); break;
      }
    }
    if (!e.passed) audit.failures.push_back(e.id);
    audit.pointwise.push_back(std::move(e));
  }

  struct IntSpec {
    const char* id;
    const char* quantity;
    std::function<double(double)> fn;
  };
  const std::vector<IntSpec> ispecs = {
      {"I1", "phi^2 f'^3 / xi(f)",
       [&](double s) {
         const double ph = m.phi(s), fp = dom.f.d1(s);
         return ph * ph * fp * fp * fp / dom.xi_f(s);
       }},
      {"I2", "phi^2 (theta'/theta + phi'/phi) f'^2",
       [&](double s) {
         const double ph = m.phi(s), fp = dom.f.d1(s);
         return ph * ph * (m.theta.d1(s) / m.theta(s) + m.phi.d1(s) / ph) * fp * fp;
       }},
      {"I3", "xi(f) xi''(f)", [&](double s) { return dom.xi_f(s) * dom.xiddot_f(s); }},
      {"I4", "(f'/xi(f)) (1 - xi'(f)^2)",
       [&](double s) {
         return dom.f.d1(s) / dom.xi_f(s) * one_minus_xidot_sq(m.xi, dom.f(s));
       }},
      {"I5", "phi' f'", [&](double s) { return m.phi.d1(s) * dom.f.d1(s); }},
  };
  bool inconclusive = false;
  for (const auto& spec : ispecs) {
    IntegralEntry e;
    e.id = spec.id;
    e.quantity = spec.quantity;
    try {
      e.verdict = improper_integral_verdict(spec.fn, s0, horizon, thr);
      e.passed = e.verdict.kind == ConvergenceKind::Convergent;
      e.detail = std::string("absolute integrand ") + to_string(e.verdict.kind);
    } catch (const Error& err) {
      e.passed = false;
      e.verdict.kind = ConvergenceKind::Inconclusive;
      e.detail = err.what();
    }
    if (!e.passed) {
      if (e.verdict.kind == ConvergenceKind::Inconclusive) {
        inconclusive = true;
      }
      audit.failures.push_back(e.id);
    }
    audit.integral.push_back(std::move(e));
  }

  bool hard_fail = false;
  for (const auto& e : audit.pointwise) hard_fail |= !e.passed;
  for (const auto& e : audit.integral) {
    hard_fail |= e.verdict.kind == ConvergenceKind::Divergent;
  }
  if (audit.failures.empty()) {
    audit.overall = AuditOverall::Pass;
  } else if (hard_fail || !inconclusive) {
    audit.overall = AuditOverall::Fail;
  } else {
    audit.overall = AuditOverall::Inconclusive;
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Verdict.

enum class Verdict { Recurrent, Transient, Inapplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Recurrent: return "Recurrent";
    case Verdict::Transient: return "Transient";
    default: return "Inapplicable";
  }
}

struct ClassifierOptions {
  double s0 = std::numeric_limits<double>::quiet_NaN();       // NaN: automatic
  double horizon = std::numeric_limits<double>::quiet_NaN();  // NaN: automatic
  WindowThresholds thresholds;
  AuditTolerances tolerances;
};

struct ClassificationReport {
  HypothesisAudit audit;
  ConvergenceVerdict I_verdict;
  Verdict verdict = Verdict::Inapplicable;
  double s0 = 0.0;
  double horizon = 0.0;
  std::string note;
};

inline Window resolve_window(const TubeDomain& dom, const ClassifierOptions& opts) {
  Window w;
  if (std::isnan(opts.s0) || std::isnan(opts.horizon)) {
    w = default_window(dom);
  }
  if (!std::isnan(opts.s0)) w.s0 = opts.s0;
  if (!std::isnan(opts.horizon)) w.horizon = opts.horizon;
  return w;
}

inline ClassificationReport classify(const TubeDomain& dom, const ClassifierOptions& opts = {}) {
  const Window w = resolve_window(dom, opts);
  ClassificationReport rep;
  rep.s0 = w.s0;
  rep.horizon = w.horizon;
  rep.audit = hypothesis_audit(dom, w.s0, w.horizon, opts.thresholds, opts.tolerances);
  rep.I_verdict = improper_integral_verdict_log(
      [&](double s) { return log_integrand_I(dom, s); }, w.s0, w.horizon, opts.thresholds);
  if (rep.audit.overall == AuditOverall::Pass) {
    if (rep.I_verdict.kind == ConvergenceKind::Divergent) rep.verdict = Verdict::Recurrent;
    if (rep.I_verdict.kind == ConvergenceKind::Convergent) rep.verdict = Verdict::Transient;
  }
  rep.note = "heuristic at horizon " + std::to_string(w.horizon);
  return rep;
}

struct ScanRow {
  double alpha = 0.0;
  Verdict verdict = Verdict::Inapplicable;
  ConvergenceKind I_kind = ConvergenceKind::Inconclusive;
  AuditOverall audit = AuditOverall::Inconclusive;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  bool has_cutoff = false;
  double cutoff = 0.0;
};

/// Classifies family(alpha) for each alpha. The cutoff is the midpoint of the
/// largest Recurrent alpha and the smallest Transient alpha.
inline ScanResult threshold_scan(const std::function<TubeDomain(double)>& family,
                                 const std::vector<double>& alphas,
                                 const ClassifierOptions& opts = {}) {
  ScanResult out;
  double last_rec = -std::numeric_limits<double>::infinity();
  double first_tr = std::numeric_limits<double>::infinity();
  for (double a : alphas) {
    const auto rep = classify(family(a), opts);
    out.rows.push_back({a, rep.verdict, rep.I_verdict.kind, rep.audit.overall});
    if (rep.verdict == Verdict::Recurrent) last_rec = std::max(last_rec, a);
    if (rep.verdict == Verdict::Transient) first_tr = std::min(first_tr, a);
  }
  if (std::isfinite(last_rec) && std::isfinite(first_tr)) {
    out.has_cutoff = true;
    out.cutoff = 0.5 * (last_rec + first_tr);
  }
  return out;
}

}  // namespace warptube
