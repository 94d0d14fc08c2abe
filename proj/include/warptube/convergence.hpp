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

// Dyadic-window heuristic for deciding whether an improper integral over
// [s0, infinity) converges, from samples up to a finite horizon.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "warptube/error.hpp"
#include "warptube/quadrature.hpp"

namespace warptube {

enum class ConvergenceKind { Convergent, Divergent, Inconclusive };

inline const char* to_string(ConvergenceKind k) {
  switch (k) {
    case ConvergenceKind::Convergent: return "Convergent";
    case ConvergenceKind::Divergent: return "Divergent";
    default: return "Inconclusive";
  }
}

struct WindowThresholds {
  double convergent_max = 0.9;
  double divergent_min = 0.98;
  int tail_windows = 4;
};

struct ConvergenceVerdict {
  ConvergenceKind kind = ConvergenceKind::Inconclusive;
  bool has_value = false;
  double value_estimate = 0.0;
  double log_value_estimate = -std::numeric_limits<double>::infinity();
  std::vector<double> window_ratios;
  std::vector<double> log_windows;
  double s0 = 0.0;
  double horizon = 0.0;
};

namespace detail {

inline double window_ratio(double log_a, double log_b) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  if (log_a == ninf) {
    return log_b == ninf ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::exp(log_b - log_a);
}

inline std::vector<double> dyadic_edges(double s0, double horizon) {
  if (!(s0 > 0.0)) throw DomainError("window start must be positive");
  if (!(horizon >= 16.0 * s0 * (1.0 - 1e-12))) {
    throw DomainError("horizon must be at least 16 times the window start");
  }
  std::vector<double> edges{s0};
  while (edges.back() * 2.0 <= horizon * (1.0 + 1e-12)) {
    edges.push_back(edges.back() * 2.0);
  }
  return edges;
}

inline ConvergenceVerdict assemble_verdict(std::vector<double> log_windows,
                                           double s0, double horizon,
                                           const WindowThresholds& thr) {
  ConvergenceVerdict v;
  v.s0 = s0;
  v.horizon = horizon;
  for (std::size_t k = 0; k + 1 < log_windows.size(); ++k) {
    v.window_ratios.push_back(window_ratio(log_windows[k], log_windows[k + 1]));
  }
  const int n = thr.tail_windows;
  if (n >= 1 && static_cast<int>(v.window_ratios.size()) >= n) {
    const auto tail_begin = v.window_ratios.end() - n;
    const bool conv = std::all_of(tail_begin, v.window_ratios.end(),
                                  [&](double r) { return r <= thr.convergent_max; });
    const bool div = std::all_of(tail_begin, v.window_ratios.end(),
                                 [&](double r) { return r >= thr.divergent_min; });
    if (conv) {
      v.kind = ConvergenceKind::Convergent;
      const double rho = *std::max_element(tail_begin, v.window_ratios.end());
      double log_sum = -std::numeric_limits<double>::infinity();
      for (double lw : log_windows) log_sum = log_add_exp(log_sum, lw);
      if (rho > 0.0) {
        log_sum = log_add_exp(log_sum,
                              log_windows.back() + std::log(rho / (1.0 - rho)));
      }
      v.has_value = true;
      v.log_value_estimate = log_sum;
      v.value_estimate = std::exp(log_sum);
    } else if (div) {
      v.kind = ConvergenceKind::Divergent;
    }
  }
  v.log_windows = std::move(log_windows);
  return v;
}

inline QuadratureOptions window_options() {
  QuadratureOptions o;
  o.rel_tol = 1e-9;
  o.max_intervals = 2000;
  return o;
}

}  // namespace detail

/// Applies the dyadic-window rule to |fn| on [s0, horizon].
template <class Fn>
ConvergenceVerdict improper_integral_verdict(const Fn& fn, double s0, double horizon,
                                             const WindowThresholds& thr = {}) {
  const auto edges = detail::dyadic_edges(s0, horizon);
  std::vector<double> logs;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    auto res = integrate([&](double s) { return std::abs(fn(s)); }, edges[k],
                         edges[k + 1], detail::window_options());
    if (!res.converged && res.abs_error > 1e-4 * std::abs(res.value)) {
      throw IntegrationError("window [" + std::to_string(edges[k]) + ", " +
                             std::to_string(edges[k + 1]) + "] did not converge");
    }
    logs.push_back(res.value > 0.0 ? std::log(res.value)
                                   : -std::numeric_limits<double>::infinity());
  }
  return detail::assemble_verdict(std::move(logs), s0, horizon, thr);
}

/// Same rule for an integrand supplied as its logarithm, for integrands
/// whose magnitude leaves the double range.
template <class LogFn>
ConvergenceVerdict improper_integral_verdict_log(const LogFn& log_fn, double s0,
                                                 double horizon,
                                                 const WindowThresholds& thr = {}) {
  const auto edges = detail::dyadic_edges(s0, horizon);
  std::vector<double> logs;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    auto res = integrate_log(log_fn, edges[k], edges[k + 1], detail::window_options());
    if (!res.converged && res.rel_error > 1e-4) {
      throw IntegrationError("window [" + std::to_string(edges[k]) + ", " +
                             std::to_string(edges[k + 1]) + "] did not converge");
    }
    logs.push_back(res.log_value);
  }
  return detail::assemble_verdict(std::move(logs), s0, horizon, thr);
}

}  // namespace warptube
