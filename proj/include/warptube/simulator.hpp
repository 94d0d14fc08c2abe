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

// Monte Carlo simulation of the orbit-space diffusion (generator one half of
// the orbit Laplacian) with normal reflection at r = f(s).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "warptube/error.hpp"
#include "warptube/geometry.hpp"
#include "warptube/lyapunov.hpp"
#include "warptube/quadrature.hpp"
#include "warptube/rng.hpp"

namespace warptube {

/// Projection: Euler step in (s, r), points beyond the wall are projected
/// back along the inward normal.
/// LevelChart: Euler step in (sigma, r) where rho = F(sigma, r). The level
/// curves meet the wall at right angles, so reflection only folds r, and
/// the exit levels are levels of the Lyapunov argument.
enum class ReflectionMode { Projection, LevelChart };

inline const char* to_string(ReflectionMode m) {
  return m == ReflectionMode::Projection ? "Projection" : "LevelChart";
}

enum class RFloorMode { Mirror };

struct SimConfig {
  double dt = 1e-3;
  long long n_paths = 10000;
  std::uint64_t master_seed = 1;
  double t_max = 1e4;
  ReflectionMode reflection_mode = ReflectionMode::Projection;
  RFloorMode r_floor_mode = RFloorMode::Mirror;
  double s_floor = 0.0;
  bool bridge_correction = true;  // crossing probability between steps
  unsigned workers = 0;           // 0: hardware concurrency

  void validate() const {
    if (!(dt > 0.0) || dt > 1e-2) throw DomainError("dt must lie in (0, 1e-2]");
    if (n_paths < 1) throw DomainError("n_paths must be at least 1");
    if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
    if (!(s_floor >= 0.0)) throw DomainError("s_floor must be nonnegative");
  }
};

struct PathState {
  double s = 0.0;
  double r = 0.0;
  double t = 0.0;
  long long reflections = 0;
};

namespace detail {

inline double clamp_drift(double v, double cap) {
  if (std::isnan(v)) return v;
  return std::clamp(v, -cap, cap);
}

struct StepOut {
  PathState state;
  double variance = 1.0;  // variance rate of the level coordinate
};

inline StepOut step_projection(const PathState& in, const TubeDomain& dom, const SimConfig& cfg,
                               double z1, double z2) {
  const auto& m = dom.model;
  const double sq = std::sqrt(cfg.dt);
  const double cap = 10.0 / sq;
  const double s = in.s, r = in.r;
  const double ph = m.phi(s);
  const double b_s = (m.p - 1) * m.theta.d1(s) / m.theta(s) + m.q * m.phi.d1(s) / ph;
  double b_r = 0.0;
  if (m.q > 1) b_r = r > 0.0 ? (m.q - 1) * m.xi.d1(r) / (m.xi(r) * ph * ph) : cap;
  StepOut out;
  PathState& st = out.state;
  st = in;
  st.s = s + clamp_drift(0.5 * b_s, cap) * cfg.dt + sq * z1;
  st.r = r + clamp_drift(0.5 * b_r, cap) * cfg.dt + sq * z2 / ph;
  st.t = in.t + cfg.dt;
  // (i) fiber center
  if (st.r < 0.0) st.r = -st.r;
  // (ii) base floor
  const double floor = std::max(dom.s_start, cfg.s_floor);
  if (st.s < floor) st.s = 2.0 * floor - st.s;
  // (iii) wall: one Newton step for the foot of the normal, then onto the wall
  const double fv = dom.f(st.s);
  if (st.r > fv) {
    const double p2 = m.phi(st.s) * m.phi(st.s);
    const double fp = dom.f.d1(st.s);
    double sb = st.s - p2 * (fv - st.r) * fp / (1.0 + p2 * fp * fp);
    sb = std::max(sb, floor);
    st.s = sb;
    st.r = dom.f(sb);
    ++st.reflections;
  }
  return out;
}

inline StepOut step_chart(const PathState& in, const TubeDomain& dom, const SimConfig& cfg,
                          double z1, double z2) {
  const auto& m = dom.model;
  const double sq = std::sqrt(cfg.dt);
  const double cap = 10.0 / sq;
  const double sigma = in.s, r = in.r;
  const auto q = slice(dom, sigma);
  const auto a = detail::aux_unchecked(dom, q, r);
  if (!(a.C > 0.0)) {
    throw DegenerateChart("C <= 0 at sigma = " + std::to_string(sigma));
  }
  const double rho = a.F;
  const double phr = m.phi(rho);
  const double phr2 = phr * phr;
  const double b = (m.p - 1) * m.theta.d1(rho) / m.theta(rho) + m.q * m.phi.d1(rho) / phr;
  const double x = m.xi(r), xd = m.xi.d1(r), xdd = m.xi.d2(r);
  const double P = q.phi * q.phi * q.L;
  const double C = a.C;
  const double Sr = P * x * xd / C;
  const double x2d2 = x * x * xd * xd;
  const double gen = -a.Cprime * (1.0 + P * P * x2d2 / phr2) / (C * C * C) + b / C +
                     P / phr2 * ((m.q * xd * xd + x * xdd) / C + 2.0 * q.E * x2d2 / (C * C));
  double b_r = 0.0;
  if (m.q > 1) b_r = r > 0.0 ? (m.q - 1) * xd / (x * phr2) : cap;
  StepOut out;
  PathState& st = out.state;
  st = in;
  st.s = sigma + clamp_drift(0.5 * gen, cap) * cfg.dt + sq * (z1 / C + Sr * z2 / phr);
  st.r = r + clamp_drift(0.5 * b_r, cap) * cfg.dt + sq * z2 / phr;
  st.t = in.t + cfg.dt;
  out.variance = 1.0 / (C * C) + Sr * Sr / phr2;
  if (st.r < 0.0) st.r = -st.r;
  const double floor = std::max(dom.s_start, cfg.s_floor);
  if (st.s < floor) st.s = 2.0 * floor - st.s;
  const double fv = dom.f(st.s);
  if (st.r > fv) {
    st.r = 2.0 * fv - st.r;
    ++st.reflections;
  }
  st.r = std::clamp(st.r, 0.0, fv);
  return out;
}

inline StepOut step_any(const PathState& in, const TubeDomain& dom, const SimConfig& cfg,
                        double z1, double z2) {
  return cfg.reflection_mode == ReflectionMode::Projection
             ? step_projection(in, dom, cfg, z1, z2)
             : step_chart(in, dom, cfg, z1, z2);
}

}  // namespace detail

/// One Euler-Maruyama step with boundary handling, driven by the given pair of
/// standard normals.
inline PathState step(const PathState& state, const TubeDomain& dom, const SimConfig& cfg,
                      double z1, double z2) {
  return detail::step_any(state, dom, cfg, z1, z2).state;
}

enum class ExitSide : std::int8_t { Lower, Upper, Censored };

struct PathRecord {
  long long path_index = 0;
  ExitSide exit_side = ExitSide::Censored;
  double exit_time = 0.0;
  long long reflections = 0;
};

struct ExitStats {
  double p_hit_b_first = 0.0;
  double stderr = 0.0;
  long long n_censored = 0;
  long long n_eff = 0;
  long long n_paths = 0;
  double a = 0.0, b = 0.0, s0 = 0.0, r0 = 0.0;
  double dt = 0.0;
  double mean_exit_time = 0.0;
  double mean_reflections = 0.0;
  ReflectionMode mode = ReflectionMode::Projection;
};

namespace detail {

inline PathRecord run_path(const TubeDomain& dom, double s0, double r0, double a, double b,
                           const SimConfig& cfg, long long index) {
  auto eng = path_engine(cfg.master_seed, static_cast<std::uint64_t>(index));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  PathState st{s0, r0, 0.0, 0};
  PathRecord rec;
  rec.path_index = index;
  while (true) {
    if (st.t >= cfg.t_max) {
      rec.exit_side = ExitSide::Censored;
      break;
    }
    const double z1 = normal(eng);
    const double z2 = normal(eng);
    const double prev = st.s;
    StepOut out;
    try {
      out = step_any(st, dom, cfg, z1, z2);
    } catch (const Error& e) {
      // A non-finite state usually surfaces first as a profile domain error.
      throw SimulationFault(e.what(), index, st.t + cfg.dt);
    }
    st = out.state;
    if (!std::isfinite(st.s) || !std::isfinite(st.r)) {
      throw SimulationFault("non-finite state", index, st.t);
    }
    if (st.s >= b) {
      rec.exit_side = ExitSide::Upper;
      break;
    }
    if (st.s <= a) {
      rec.exit_side = ExitSide::Lower;
      break;
    }
    if (cfg.bridge_correction) {
      const double v = out.variance * cfg.dt;
      const double ub = unif(eng), ua = unif(eng);
      if (ub < std::exp(-2.0 * (b - prev) * (b - st.s) / v)) {
        rec.exit_side = ExitSide::Upper;
        break;
      }
      if (ua < std::exp(-2.0 * (prev - a) * (st.s - a) / v)) {
        rec.exit_side = ExitSide::Lower;
        break;
      }
    }
  }
  rec.exit_time = st.t;
  rec.reflections = st.reflections;
  return rec;
}

}  // namespace detail

/// Fraction of paths from (s0, r0) whose level coordinate reaches b before a.
/// In LevelChart mode s0, a and b are values of the chart coordinate sigma.
inline ExitStats exit_probability(const TubeDomain& dom, double s0, double r0, double a,
                                  double b, const SimConfig& cfg,
                                  std::vector<PathRecord>* records = nullptr) {
  cfg.validate();
  if (!(dom.s_start <= a && a < s0 && s0 < b)) {
    throw DomainError("exit_probability needs s_start <= a < s0 < b");
  }
  if (!(r0 >= 0.0 && r0 <= dom.f(s0))) throw DomainError("r0 must lie in [0, f(s0)]");
  const long long n = cfg.n_paths;
  std::vector<PathRecord> recs(static_cast<std::size_t>(n));
  unsigned workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<long long>(n, 1024))));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<long long> error_index(workers, std::numeric_limits<long long>::max());
  auto work = [&](unsigned w) {
    for (long long i = w; i < n; i += workers) {
      try {
        recs[static_cast<std::size_t>(i)] = detail::run_path(dom, s0, r0, a, b, cfg, i);
      } catch (...) {
        errors[w] = std::current_exception();
        error_index[w] = i;
        return;
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  // Report the failing path with the smallest index.
  const auto it = std::min_element(error_index.begin(), error_index.end());
  if (*it != std::numeric_limits<long long>::max()) {
    std::rethrow_exception(errors[static_cast<std::size_t>(it - error_index.begin())]);
  }
  ExitStats out;
  out.n_paths = n;
  out.a = a;
  out.b = b;
  out.s0 = s0;
  out.r0 = r0;
  out.dt = cfg.dt;
  out.mode = cfg.reflection_mode;
  long long hits = 0;
  double time_sum = 0.0, refl_sum = 0.0;
  for (const auto& rec : recs) {
    if (rec.exit_side == ExitSide::Censored) {
      ++out.n_censored;
      continue;
    }
    if (rec.exit_side == ExitSide::Upper) ++hits;
    time_sum += rec.exit_time;
    refl_sum += static_cast<double>(rec.reflections);
  }
  out.n_eff = n - out.n_censored;
  if (out.n_eff == 0) throw InconclusiveStatistics("every path was censored at t_max");
  const double ne = static_cast<double>(out.n_eff);
  out.p_hit_b_first = static_cast<double>(hits) / ne;
  out.stderr = std::sqrt(out.p_hit_b_first * (1.0 - out.p_hit_b_first) / ne);
  out.mean_exit_time = time_sum / ne;
  out.mean_reflections = refl_sum / ne;
  if (records) *records = std::move(recs);
  return out;
}

/// Exit probability of the s-marginal for constant f:
/// (Lambda(s0) - Lambda(a)) / (Lambda(b) - Lambda(a)), Lambda' = theta^(1-p) phi^(-q).
inline double scale_oracle(const WarpedModel& model, double a, double b, double s0,
                           double rel_tol = 1e-12) {
  auto dens = [&](double t) {
    return std::exp((1 - model.p) * model.theta.log_value(t) - model.q * model.phi.log_value(t));
  };
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  const auto num = integrate(dens, a, s0, opts);
  const auto den = integrate(dens, a, b, opts);
  if (!num.converged || !den.converged) throw IntegrationError("scale_oracle quadrature");
  return num.value / den.value;
}

struct ExitBounds {
  double lower = 0.0;
  double upper = 0.0;
  // Bound on |F(s, r) - s| over [a, b]: how far s-levels sit from the
  // Lyapunov levels.
  double f_discrepancy = 0.0;
};

/// Optional-stopping bounds from psi-: lower and psi+: upper, ordered.
inline ExitBounds lyapunov_exit_bounds(const TubeDomain& dom, const LyapunovTable& table,
                                       double s0, double a, double b) {
  auto ratio = [&](Side side) {
    const double lb = table.log_psi(b, side);
    const double ea = std::exp(table.log_psi(a, side) - lb);
    const double es = std::exp(table.log_psi(s0, side) - lb);
    return (es - ea) / (1.0 - ea);
  };
  ExitBounds out;
  out.lower = ratio(Side::Minus);
  out.upper = ratio(Side::Plus);
  if (out.lower > out.upper) std::swap(out.lower, out.upper);
  for (double s : geometric_grid(a, b, std::pow(b / a, 1.0 / 63.0))) {
    out.f_discrepancy = std::max(out.f_discrepancy, 0.5 * std::abs(detail::slice_base(dom, s).N));
  }
  return out;
}

struct RecurrenceScanRow {
  double b = 0.0;
  ExitStats stats;
};

struct RecurrenceScan {
  std::vector<RecurrenceScanRow> rows;
  // "consistent-with-Recurrent", "consistent-with-Transient" or
  // "undetermined"; diagnostic only.
  std::string diagnostic;
};

/// Exit probabilities for increasing b. Leveling (last over previous >= 0.9
/// with the last value above 3 stderr) reads as Transient, a decrease
/// beyond 2 combined stderr at every step as Recurrent.
inline RecurrenceScan recurrence_scan(const TubeDomain& dom, double s0, double r0, double a,
                                      const std::vector<double>& b_list, const SimConfig& cfg) {
  RecurrenceScan out;
  for (double b : b_list) out.rows.push_back({b, exit_probability(dom, s0, r0, a, b, cfg)});
  out.diagnostic = "undetermined";
  if (out.rows.size() < 2) return out;
  bool decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& x = out.rows[i - 1].stats;
    const auto& y = out.rows[i].stats;
    if (!(x.p_hit_b_first - y.p_hit_b_first >
          2.0 * std::hypot(x.stderr, y.stderr))) {
      decreasing = false;
    }
  }
  const auto& last = out.rows.back().stats;
  const auto& prev = out.rows[out.rows.size() - 2].stats;
  const bool level = last.p_hit_b_first >= 0.9 * prev.p_hit_b_first &&
                     last.p_hit_b_first > 3.0 * last.stderr;
  if (level) {
    out.diagnostic = "consistent-with-Transient";
  } else if (decreasing) {
    out.diagnostic = "consistent-with-Recurrent";
  }
  return out;
}

}  // namespace warptube
