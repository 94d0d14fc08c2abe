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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "warptube/error.hpp"

namespace warptube {

/// Backend of a ScalarProfile. derivative(s, k) must be valid for
/// 0 <= k <= analytic_order() on [domain_start(), domain_end()].
class ProfileImpl {
 public:
  virtual ~ProfileImpl() = default;
  virtual double derivative(double s, int k) const = 0;
  virtual double log_value(double s) const { return std::log(derivative(s, 0)); }
  virtual int analytic_order() const { return 2; }
  virtual double domain_start() const { return 0.0; }
  virtual double domain_end() const {
    return std::numeric_limits<double>::infinity();
  }
  virtual std::string label() const = 0;
};

/// Immutable handle to a positive scalar function of one variable.
/// Copies share the backend; evaluation is thread safe.
class ScalarProfile {
 public:
  ScalarProfile() = default;
  explicit ScalarProfile(std::shared_ptr<const ProfileImpl> impl)
      : impl_(std::move(impl)) {}

  bool valid() const noexcept { return static_cast<bool>(impl_); }
  const std::string label() const { return impl_->label(); }
  double domain_start() const { return impl_->domain_start(); }
  double domain_end() const { return impl_->domain_end(); }
  int analytic_order() const { return impl_->analytic_order(); }

  double operator()(double s) const { return eval(s, 0); }
  double d1(double s) const { return eval(s, 1); }
  double d2(double s) const { return eval(s, 2); }

  double log_value(double s) const {
    check_domain(s);
    return impl_->log_value(s);
  }

  /// d^order/ds^order at s. Orders above analytic_order (at most two above)
  /// fall back to finite differences of the highest analytic derivative.
  double eval(double s, int order) const {
    check_domain(s);
    const int top = impl_->analytic_order();
    if (order < 0 || order > top + 2) {
      throw UnsupportedOrder("derivative order " + std::to_string(order) +
                             " unavailable for " + impl_->label());
    }
    if (order <= top) return impl_->derivative(s, order);
    return finite_difference(s, order - top, top);
  }

 private:
  void check_domain(double s) const {
    if (!impl_) throw DomainError("empty profile");
    const double lo = impl_->domain_start();
    const double hi = impl_->domain_end();
    const double slack = 1e-12 * std::max(1.0, std::abs(lo));
    if (!(s >= lo - slack) || s > hi * (1.0 + 1e-12)) {
      throw DomainError(impl_->label() + ": argument " + std::to_string(s) +
                        " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
  }

  double finite_difference(double s, int extra, int top) const {
    const double h =
        std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(s));
    const double lo = impl_->domain_start();
    const double hi = impl_->domain_end();
    auto g = [&](double x) { return impl_->derivative(x, top); };
    const bool room_left = s - 2.0 * h >= lo;
    const bool room_right = s + 2.0 * h <= hi;
    if (room_left && room_right) {
      if (extra == 1) return (g(s + h) - g(s - h)) / (2.0 * h);
      return (g(s + h) - 2.0 * g(s) + g(s - h)) / (h * h);
    }
    // One-sided stencils near an end of the domain.
    const double dir = room_right ? 1.0 : -1.0;
    const double hs = dir * h;
    if (extra == 1) {
      return (-3.0 * g(s) + 4.0 * g(s + hs) - g(s + 2.0 * hs)) / (2.0 * hs);
    }
    return (2.0 * g(s) - 5.0 * g(s + hs) + 4.0 * g(s + 2.0 * hs) -
            g(s + 3.0 * hs)) /
           (h * h);
  }

  std::shared_ptr<const ProfileImpl> impl_;
};

namespace detail {

class PowerProfile final : public ProfileImpl {
 public:
  explicit PowerProfile(double a) : a_(a) {}
  double derivative(double s, int k) const override {
    const double x = 1.0 + s;
    switch (k) {
      case 0: return std::pow(x, a_);
      case 1: return a_ * std::pow(x, a_ - 1.0);
      default: return a_ * (a_ - 1.0) * std::pow(x, a_ - 2.0);
    }
  }
  double log_value(double s) const override { return a_ * std::log1p(s); }
  std::string label() const override { return "power(" + fmt(a_) + ")"; }
  static std::string fmt(double v) {
    std::string out = std::to_string(v);
    while (out.size() > 1 && out.back() == '0') out.pop_back();
    if (!out.empty() && out.back() == '.') out.pop_back();
    return out;
  }

 private:
  double a_;
};

class LinearProfile final : public ProfileImpl {
 public:
  double derivative(double s, int k) const override {
    return k == 0 ? s : (k == 1 ? 1.0 : 0.0);
  }
  std::string label() const override { return "linear"; }
};

class SinhProfile final : public ProfileImpl {
 public:
  double derivative(double s, int k) const override {
    return k % 2 == 0 ? std::sinh(s) : std::cosh(s);
  }
  double log_value(double s) const override {
    if (s > 20.0) return s - std::log(2.0) + std::log1p(-std::exp(-2.0 * s));
    return std::log(std::sinh(s));
  }
  std::string label() const override { return "sinh"; }
};

class CoshProfile final : public ProfileImpl {
 public:
  double derivative(double s, int k) const override {
    return k % 2 == 0 ? std::cosh(s) : std::sinh(s);
  }
  double log_value(double s) const override {
    if (s > 20.0) return s - std::log(2.0) + std::log1p(std::exp(-2.0 * s));
    return std::log(std::cosh(s));
  }
  std::string label() const override { return "cosh"; }
};

class ConstProfile final : public ProfileImpl {
 public:
  explicit ConstProfile(double c) : c_(c) {}
  double derivative(double, int k) const override { return k == 0 ? c_ : 0.0; }
  std::string label() const override {
    return "const(" + PowerProfile::fmt(c_) + ")";
  }

 private:
  double c_;
};

class ExpProfile final : public ProfileImpl {
 public:
  explicit ExpProfile(double a) : a_(a) {}
  double derivative(double s, int k) const override {
    const double e = std::exp(a_ * s);
    return k == 0 ? e : (k == 1 ? a_ * e : a_ * a_ * e);
  }
  double log_value(double s) const override { return a_ * s; }
  std::string label() const override {
    return "exp(" + PowerProfile::fmt(a_) + ")";
  }

 private:
  double a_;
};

class StretchExpProfile final : public ProfileImpl {
 public:
  StretchExpProfile(double a, double g) : a_(a), g_(g) {}
  double derivative(double s, int k) const override {
    const double e = std::exp(a_ * std::pow(s, g_));
    if (k == 0) return e;
    if (s == 0.0) {
      // Limits at the origin; only finite for g >= 1 (resp. g >= 2).
      if (k == 1) return g_ > 1.0 ? 0.0 : (g_ == 1.0 ? a_ : -inf_sign());
      if (g_ > 2.0) return 0.0;
      if (g_ == 2.0) return 2.0 * a_;
      if (g_ == 1.0) return a_ * a_;
      return std::numeric_limits<double>::infinity();
    }
    const double d = a_ * g_ * std::pow(s, g_ - 1.0);
    if (k == 1) return d * e;
    const double dd = a_ * g_ * (g_ - 1.0) * std::pow(s, g_ - 2.0);
    return (dd + d * d) * e;
  }
  double log_value(double s) const override { return a_ * std::pow(s, g_); }
  std::string label() const override {
    return "stretchexp(" + PowerProfile::fmt(a_) + "," + PowerProfile::fmt(g_) +
           ")";
  }

 private:
  double inf_sign() const {
    return a_ < 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
  }
  double a_, g_;
};

class FunctionProfile final : public ProfileImpl {
 public:
  FunctionProfile(std::string label, double start, int order,
                  std::function<double(double, int)> fn)
      : label_(std::move(label)), start_(start), order_(order), fn_(std::move(fn)) {}
  double derivative(double s, int k) const override { return fn_(s, k); }
  int analytic_order() const override { return order_; }
  double domain_start() const override { return start_; }
  std::string label() const override { return label_; }

 private:
  std::string label_;
  double start_;
  int order_;
  std::function<double(double, int)> fn_;
};

}  // namespace detail

inline ScalarProfile power_profile(double a) {
  return ScalarProfile(std::make_shared<detail::PowerProfile>(a));
}
inline ScalarProfile linear_profile() {
  return ScalarProfile(std::make_shared<detail::LinearProfile>());
}
inline ScalarProfile sinh_profile() {
  return ScalarProfile(std::make_shared<detail::SinhProfile>());
}
inline ScalarProfile cosh_profile() {
  return ScalarProfile(std::make_shared<detail::CoshProfile>());
}
inline ScalarProfile const_profile(double c) {
  if (!(c > 0.0)) throw DomainError("const profile needs a positive value");
  return ScalarProfile(std::make_shared<detail::ConstProfile>(c));
}
inline ScalarProfile exp_profile(double a) {
  return ScalarProfile(std::make_shared<detail::ExpProfile>(a));
}
inline ScalarProfile stretchexp_profile(double a, double g) {
  if (!(g > 0.0)) throw DomainError("stretchexp exponent must be positive");
  return ScalarProfile(std::make_shared<detail::StretchExpProfile>(a, g));
}

/// Wraps a user callable fn(s, k) returning the k-th derivative, k <= order.
inline ScalarProfile function_profile(std::string label, double domain_start,
                                      int order,
                                      std::function<double(double, int)> fn) {
  return ScalarProfile(std::make_shared<detail::FunctionProfile>(
      std::move(label), domain_start, order, std::move(fn)));
}

struct ConvexityReport {
  double min_second = std::numeric_limits<double>::infinity();
  double min_first = std::numeric_limits<double>::infinity();
  bool passed = false;
};

/// Checks xi'' >= 0 and xi' >= 1 on the grid (with 1e-10 slack).
inline ConvexityReport convexity_audit(const ScalarProfile& xi,
                                       const std::vector<double>& grid) {
  ConvexityReport rep;
  for (double r : grid) {
    rep.min_second = std::min(rep.min_second, xi.d2(r));
    rep.min_first = std::min(rep.min_first, xi.d1(r));
  }
  rep.passed = rep.min_second >= -1e-10 && rep.min_first >= 1.0 - 1e-10;
  return rep;
}

// ---------------------------------------------------------------------------
// Schwarzschild-type profiles.

/// zeta(R) = 1 - eps R^2 - 2m / R^(p-2) and its first two derivatives.
struct ZetaFunction {
  double m;
  int eps;
  int p;

  double operator()(double R) const {
    return 1.0 - eps * R * R - 2.0 * m * std::pow(R, 2.0 - p);
  }
  double d1(double R) const {
    return -2.0 * eps * R + 2.0 * m * (p - 2.0) * std::pow(R, 1.0 - p);
  }
  double d2(double R) const {
    return -2.0 * eps - 2.0 * m * (p - 2.0) * (p - 1.0) * std::pow(R, -double(p));
  }
};

/// Positive root of zeta by bisection on an expanding bracket, polished by
/// Newton. Throws RootNotFound when no sign change is found.
inline double zeta_root(const ZetaFunction& z) {
  double lo = 1e-8;
  double hi = 1.0;
  if (!(z(lo) < 0.0)) throw RootNotFound("zeta is not negative near zero");
  int grow = 0;
  while (!(z(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) throw RootNotFound("no sign change of zeta on bracket");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (z(mid) < 0.0 ? lo : hi) = mid;
  }
  double R = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double d = z.d1(R);
    if (d == 0.0) break;
    const double next = R - z(R) / d;
    if (!(next > lo - 1e-12 && next < hi + 1e-12)) break;
    R = next;
  }
  return R;
}

namespace detail {

/// Tabulated solution R(s) of dR/ds = sqrt(zeta(R)), R(0) = root.
class RadialTable {
 public:
  RadialTable(ZetaFunction z, double s_max) : z_(z), s_max_(s_max) {
    r0_ = zeta_root(z_);
    dz0_ = z_.d1(r0_);
    s_handoff_ = 1e-3 * r0_;
    integrate();
  }

  double horizon() const { return r0_; }
  double s_max() const { return s_max_; }
  const ZetaFunction& zeta() const { return z_; }
  const std::vector<double>& s_nodes() const { return s_; }
  const std::vector<double>& r_nodes() const { return r_; }

  double radius(double s) const {
    if (s <= s_handoff_) return r0_ + 0.25 * dz0_ * s * s;
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = static_cast<std::size_t>(it - s_.begin());
    if (i == 0) i = 1;
    if (i >= s_.size()) i = s_.size() - 1;
    const double s0 = s_[i - 1], s1 = s_[i];
    const double h = s1 - s0;
    const double t = (s - s0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * r_[i - 1] + (t3 - 2 * t2 + t) * h * v_[i - 1] +
           (-2 * t3 + 3 * t2) * r_[i] + (t3 - t2) * h * v_[i];
  }

  /// sqrt(zeta(R(s))), using the linear near-root form below the handoff.
  double root_zeta(double s) const {
    if (s <= s_handoff_) {
      const double R = radius(s);
      const double zr = z_(R);
      return zr > 0.0 ? std::sqrt(zr) : 0.5 * dz0_ * s;
    }
    return std::sqrt(std::max(0.0, z_(radius(s))));
  }

 private:
  double rhs(double R) const { return std::sqrt(std::max(0.0, z_(R))); }

  std::pair<double, double> rk4(double R, double h) const {
    const double k1 = rhs(R);
    const double k2 = rhs(R + 0.5 * h * k1);
    const double k3 = rhs(R + 0.5 * h * k2);
    const double k4 = rhs(R + h * k3);
    return {R + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0, k1};
  }

  void integrate() {
    double s = s_handoff_;
    double R = r0_ + 0.25 * dz0_ * s * s;
    s_.push_back(s);
    r_.push_back(R);
    v_.push_back(rhs(R));
    double h = s_handoff_;
    const double tol = 1e-12;
    while (s < s_max_) {
      // Cap the step so the Hermite interpolant keeps up with the solver.
      const double cap = 0.02 * std::max(1.0, z_.eps == 0 ? s : 1.0);
      h = std::min({h, cap, s_max_ - s});
      const double full = rk4(R, h).first;
      const double half = rk4(rk4(R, 0.5 * h).first, 0.5 * h).first;
      const double err = std::abs(half - full) / 15.0;
      const double scale = tol * std::max(1.0, std::abs(half));
      if (err > scale && h > 1e-14 * std::max(1.0, s)) {
        h *= std::max(0.2, 0.9 * std::pow(scale / err, 0.2));
        continue;
      }
      s += h;
      R = half + (half - full) / 15.0;
      s_.push_back(s);
      r_.push_back(R);
      v_.push_back(rhs(R));
      if (!std::isfinite(R)) throw EvaluationError("radial ODE overflowed");
      const double grow = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 4.0;
      h *= std::clamp(grow, 0.5, 4.0);
    }
  }

  ZetaFunction z_;
  double s_max_;
  double r0_ = 0.0;
  double dz0_ = 0.0;
  double s_handoff_ = 0.0;
  std::vector<double> s_, r_, v_;
};

class SchwarzschildTheta final : public ProfileImpl {
 public:
  explicit SchwarzschildTheta(std::shared_ptr<const RadialTable> t)
      : t_(std::move(t)) {}
  double derivative(double s, int k) const override {
    if (k == 0) return t_->radius(s);
    if (k == 1) return t_->root_zeta(s);
    return 0.5 * t_->zeta().d1(t_->radius(s));
  }
  double domain_end() const override { return t_->s_max(); }
  std::string label() const override { return "schwarzschild:theta"; }

 private:
  std::shared_ptr<const RadialTable> t_;
};

class SchwarzschildPhi final : public ProfileImpl {
 public:
  explicit SchwarzschildPhi(std::shared_ptr<const RadialTable> t)
      : t_(std::move(t)) {}
  double derivative(double s, int k) const override {
    if (k == 0) return t_->root_zeta(s);
    const double R = t_->radius(s);
    if (k == 1) return 0.5 * t_->zeta().d1(R);
    return 0.5 * t_->zeta().d2(R) * t_->root_zeta(s);
  }
  double domain_end() const override { return t_->s_max(); }
  std::string label() const override { return "schwarzschild:phi"; }

 private:
  std::shared_ptr<const RadialTable> t_;
};

}  // namespace detail

struct SchwarzschildProfilePair {
  double m = 0.0;
  int eps = 0;
  int p = 3;
  double horizon_radius = 0.0;
  ScalarProfile theta;
  ScalarProfile phi;
  std::shared_ptr<const detail::RadialTable> table;
};

/// Builds theta(s) = R(s) and phi(s) = sqrt(zeta(R(s))) where s is the
/// arclength-type parameter measured from the horizon.
inline SchwarzschildProfilePair schwarzschild_build(double m, int eps, int p,
                                                    double s_max) {
  if (!(m > 0.0)) throw DomainError("schwarzschild: m must be positive");
  if (eps != 0 && eps != -1) throw DomainError("schwarzschild: eps must be 0 or -1");
  if (p < 3) throw DomainError("schwarzschild: p must be at least 3");
  if (!(s_max > 0.0)) throw DomainError("schwarzschild: s_max must be positive");
  auto table = std::make_shared<const detail::RadialTable>(ZetaFunction{m, eps, p},
                                                           s_max);
  SchwarzschildProfilePair out;
  out.m = m;
  out.eps = eps;
  out.p = p;
  out.horizon_radius = table->horizon();
  out.theta = ScalarProfile(std::make_shared<detail::SchwarzschildTheta>(table));
  out.phi = ScalarProfile(std::make_shared<detail::SchwarzschildPhi>(table));
  out.table = table;
  return out;
}

// ---------------------------------------------------------------------------
// Family identifiers.

namespace detail {

inline std::string normalize_minus(const std::string& in) {
  // Accept the unicode minus sign as well as '-'.
  std::string out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (i + 2 < in.size() && static_cast<unsigned char>(in[i]) == 0xE2 &&
        static_cast<unsigned char>(in[i + 1]) == 0x88 &&
        static_cast<unsigned char>(in[i + 2]) == 0x92) {
      out.push_back('-');
      i += 2;
    } else if (in[i] != ' ') {
      out.push_back(in[i]);
    }
  }
  return out;
}

inline double parse_number(const std::string& text, const std::string& id) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("bad number '" + text + "' in profile id " + id);
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw DomainError("bad number '" + text + "' in profile id " + id);
  }
  return v;
}

inline std::vector<double> parse_args(const std::string& body,
                                      const std::string& id) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t comma = body.find(',', start);
    const std::string piece =
        body.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    out.push_back(parse_number(piece, id));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::mutex& schwarzschild_cache_mutex() {
  static std::mutex mu;
  return mu;
}

inline std::map<std::tuple<double, int, int, double>, SchwarzschildProfilePair>&
schwarzschild_cache() {
  static std::map<std::tuple<double, int, int, double>, SchwarzschildProfilePair>
      cache;
  return cache;
}

}  // namespace detail

/// Cached builder so theta and phi of one spacetime share a table.
inline SchwarzschildProfilePair schwarzschild_cached(double m, int eps, int p,
                                                     double s_max) {
  std::lock_guard<std::mutex> lock(detail::schwarzschild_cache_mutex());
  auto key = std::make_tuple(m, eps, p, s_max);
  auto& cache = detail::schwarzschild_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto pair = schwarzschild_build(m, eps, p, s_max);
  cache.emplace(key, pair);
  return pair;
}

/// Parses a family identifier such as "power(-0.5)", "sinh" or
/// "schwarzschild(0.5,0,3):phi". s_max bounds tabulated families.
inline ScalarProfile parse_profile(const std::string& raw_id,
                                   double s_max = 1000.0) {
  const std::string id = detail::normalize_minus(raw_id);
  if (id == "linear") return linear_profile();
  if (id == "sinh") return sinh_profile();
  if (id == "cosh") return cosh_profile();
  const auto open = id.find('(');
  const auto close = id.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw DomainError("unknown profile family '" + raw_id + "'");
  }
  const std::string name = id.substr(0, open);
  const std::string tail = id.substr(close + 1);
  const auto args = detail::parse_args(id.substr(open + 1, close - open - 1), raw_id);
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw DomainError("profile '" + raw_id + "' expects " + std::to_string(n) +
                        " argument(s)");
    }
  };
  if (name == "schwarzschild") {
    need(3);
    if (tail != ":theta" && tail != ":phi") {
      throw DomainError("schwarzschild profile needs ':theta' or ':phi'");
    }
    auto pair = schwarzschild_cached(args[0], static_cast<int>(args[1]),
                                     static_cast<int>(args[2]), s_max);
    return tail == ":theta" ? pair.theta : pair.phi;
  }
  if (!tail.empty()) throw DomainError("trailing text in profile '" + raw_id + "'");
  if (name == "power") { need(1); return power_profile(args[0]); }
  if (name == "const") { need(1); return const_profile(args[0]); }
  if (name == "exp") { need(1); return exp_profile(args[0]); }
  if (name == "stretchexp") { need(2); return stretchexp_profile(args[0], args[1]); }
  throw DomainError("unknown profile family '" + raw_id + "'");
}

}  // namespace warptube
