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

// Globally adaptive Gauss-Kronrod (7/15) quadrature, plus a log-domain
// variant for integrands whose magnitude spans more than the double range.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "warptube/error.hpp"

namespace warptube {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
  int evaluations = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error, magnitude;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class Fn>
double checked_call(const Fn& fn, double x) {
  const double y = fn(x);
  if (!std::isfinite(y)) {
    throw EvaluationError("non-finite integrand sample at x = " +
                          std::to_string(x));
  }
  return y;
}

template <class Fn>
Segment gauss_kronrod15(const Fn& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked_call(fn, center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 15> samples{};
  samples[7] = fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double f1 = checked_call(fn, center - dx);
    const double f2 = checked_call(fn, center + dx);
    samples[i] = f1;
    samples[14 - i] = f2;
    kronrod += kKronrodWeights[i] * (f1 + f2);
    abs_sum += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int i = 0; i < 7; ++i) {
    asc += kKronrodWeights[i] *
           (std::abs(samples[i] - mean) + std::abs(samples[14 - i] - mean));
  }
  const double result = kronrod * half;
  asc *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  // QUADPACK error scaling.
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  const double round = 50.0 * std::numeric_limits<double>::epsilon() *
                       abs_sum * std::abs(half);
  if (round > err) err = round;
  return {a, b, result, err, abs_sum * std::abs(half)};
}

}  // namespace detail

/// Integrates fn over [a, b]. Throws EvaluationError on a non-finite sample;
/// non-convergence is reported through the result, not thrown.
template <class Fn>
QuadratureResult integrate(const Fn& fn, double a, double b,
                           const QuadratureOptions& opts = {}) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod15(fn, a, b);
  out.evaluations = 15;
  double total = first.value;
  double total_err = first.error;
  double magnitude = first.magnitude;
  heap.push(first);
  int intervals = 1;
  // The roundoff floor lets integrals that cancel to zero terminate.
  auto target = [&] {
    return std::max({opts.abs_tol, opts.rel_tol * std::abs(total),
                     100.0 * std::numeric_limits<double>::epsilon() * magnitude});
  };
  while (total_err > target()) {
    if (intervals >= opts.max_intervals) {
      out.value = total;
      out.abs_error = total_err;
      out.converged = false;
      return out;
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval cannot be split further in floating point.
      heap.push(worst);
      out.value = total;
      out.abs_error = total_err;
      out.converged = false;
      return out;
    }
    auto left = detail::gauss_kronrod15(fn, worst.a, mid);
    auto right = detail::gauss_kronrod15(fn, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    magnitude += left.magnitude + right.magnitude - worst.magnitude;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double sum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.abs_error = err;
  out.converged = true;
  return out;
}

/// Result of a log-domain integral: log of the integral of exp(log_fn).
struct LogQuadratureResult {
  double log_value = -std::numeric_limits<double>::infinity();
  double rel_error = 0.0;
  bool converged = false;
};

/// Integrates exp(log_fn) over [a, b] with a data-dependent shift so that the
/// result is representable as a logarithm even when the integral itself
/// overflows or underflows. log_fn may return -inf (a zero sample).
template <class LogFn>
LogQuadratureResult integrate_log(const LogFn& log_fn, double a, double b,
                                  const QuadratureOptions& opts = {}) {
  constexpr int kProbe = 33;
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kProbe; ++i) {
    const double x = a + (b - a) * (static_cast<double>(i) / (kProbe - 1));
    const double lv = log_fn(x);
    if (std::isnan(lv) || lv == std::numeric_limits<double>::infinity()) {
      throw EvaluationError("non-finite log-integrand sample at x = " +
                            std::to_string(x));
    }
    shift = std::max(shift, lv);
  }
  LogQuadratureResult out;
  if (shift == -std::numeric_limits<double>::infinity()) {
    out.converged = true;
    return out;
  }
  auto scaled = [&](double x) {
    const double lv = log_fn(x);
    if (std::isnan(lv) || lv == std::numeric_limits<double>::infinity()) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return std::exp(lv - shift);
  };
  const auto res = integrate(scaled, a, b, opts);
  out.converged = res.converged;
  if (res.value > 0.0) {
    out.log_value = std::log(res.value) + shift;
    out.rel_error = res.abs_error / res.value;
  }
  return out;
}

/// log(exp(x) + exp(y)) without overflow.
inline double log_add_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

}  // namespace warptube
