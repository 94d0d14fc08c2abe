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
#include <limits>
#include <string>
#include <vector>

#include "warptube/convergence.hpp"
#include "warptube/error.hpp"
#include "warptube/profiles.hpp"
#include "warptube/quadrature.hpp"

namespace warptube {

/// Base dimension p, fiber dimension q and the three warping profiles.
struct WarpedModel {
  int p = 2;
  int q = 1;
  ScalarProfile theta;
  ScalarProfile phi;
  ScalarProfile xi;

  /// Checks dimensions, convexity of xi and positivity on the given ranges.
  void validate(const std::vector<double>& s_grid,
                const std::vector<double>& r_grid) const {
    if (p < 2) throw DomainError("p must be at least 2");
    if (q < 1) throw DomainError("q must be at least 1");
    if (!theta.valid() || !phi.valid() || !xi.valid()) {
      throw DomainError("model profiles must all be set");
    }
    const auto conv = convexity_audit(xi, r_grid);
    if (!conv.passed) {
      throw DomainError("xi fails the convexity audit (min xi'' = " +
                        std::to_string(conv.min_second) + ", min xi' = " +
                        std::to_string(conv.min_first) + ")");
    }
    for (double s : s_grid) {
      if (!(theta(s) > 0.0) || !(phi(s) > 0.0)) {
        throw DomainError("theta and phi must be positive at s = " + std::to_string(s));
      }
    }
    for (double r : r_grid) {
      if (r > 0.0 && !(xi(r) > 0.0)) {
        throw DomainError("xi must be positive at r = " + std::to_string(r));
      }
    }
  }
};

/// Tube {r < f(s)} in the model, starting at s_start.
struct TubeDomain {
  WarpedModel model;
  ScalarProfile f;
  double s_start = 0.0;
  std::string label;

  int p() const { return model.p; }
  int q() const { return model.q; }

  /// Largest s at which every profile can be evaluated.
  double s_end() const {
    return std::min({model.theta.domain_end(), model.phi.domain_end(), f.domain_end()});
  }

  // xi composed with f, and the first two xi derivatives at r = f(s).
  double xi_f(double s) const { return model.xi(f(s)); }
  double xidot_f(double s) const { return model.xi.d1(f(s)); }
  double xiddot_f(double s) const { return model.xi.d2(f(s)); }
};

/// 1 - xi'(r)^2 without cancellation for small r: xi'(r) - 1 is taken as
/// (xi'(0) - 1) plus a 5-point Gauss-Legendre integral of xi'' over [0, r].
inline double one_minus_xidot_sq(const ScalarProfile& xi, double r) {
  const double xd = xi.d1(r);
  if (r > 0.25) return 1.0 - xd * xd;
  static constexpr double kNodes[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                       0.538469310105683, 0.906179845938664};
  static constexpr double kWeights[5] = {0.236926885056189, 0.478628670499366,
                                         0.568888888888889, 0.478628670499366,
                                         0.236926885056189};
  double integral = 0.0;
  for (int i = 0; i < 5; ++i) {
    integral += kWeights[i] * xi.d2(0.5 * r * (1.0 + kNodes[i]));
  }
  const double excess = (xi.d1(0.0) - 1.0) + 0.5 * r * integral;
  return -excess * (xd + 1.0);
}

struct BoundaryFrame {
  double W = 1.0;
  double nu_s = 0.0;
  double nu_r = -1.0;
};

/// Inward unit normal at the boundary point (s, f(s)), coordinate basis.
inline BoundaryFrame normal_frame(const TubeDomain& dom, double s) {
  const double ph = dom.model.phi(s);
  const double fp = dom.f.d1(s);
  BoundaryFrame out;
  out.W = std::sqrt(1.0 + ph * ph * fp * fp);
  out.nu_s = ph * fp / out.W;
  out.nu_r = -1.0 / (ph * out.W);
  return out;
}

/// Density of the Riemannian volume in orbit coordinates (without the
/// constant sphere areas).
inline double volume_element(const WarpedModel& model, double s, double r) {
  return std::pow(model.theta(s), model.p - 1) * std::pow(model.phi(s), model.q) *
         std::pow(model.xi(r), model.q - 1);
}

namespace detail {

/// log of the fiber integral of xi^(q-1) over [0, f], computed as
/// log f + log of the integral over [0, 1] of xi(f t)^(q-1), so that tiny
/// fibers do not underflow.
inline double log_fiber_volume(const ScalarProfile& xi, int q, double f,
                               bool xi_is_identity) {
  if (!(f > 0.0)) return -std::numeric_limits<double>::infinity();
  if (q == 1) return std::log(f);
  if (xi_is_identity) return q * std::log(f) - std::log(double(q));
  QuadratureOptions o;
  o.rel_tol = 1e-11;
  auto res = integrate_log(
      [&](double t) {
        const double r = f * t;
        return r > 0.0 ? (q - 1) * xi.log_value(r)
                       : -std::numeric_limits<double>::infinity();
      },
      0.0, 1.0, o);
  if (!res.converged && res.rel_error > 1e-8) {
    throw IntegrationError("fiber volume quadrature failed");
  }
  return std::log(f) + res.log_value;
}

inline bool is_identity(const ScalarProfile& p) { return p.label() == "linear"; }

inline double log_volume_density(const TubeDomain& dom, double s) {
  const auto& m = dom.model;
  return (m.p - 1) * m.theta.log_value(s) + m.q * m.phi.log_value(s) +
         log_fiber_volume(m.xi, m.q, dom.f(s), is_identity(m.xi));
}

}  // namespace detail

enum class Finiteness { Finite, Infinite, Inconclusive };

inline const char* to_string(Finiteness f) {
  switch (f) {
    case Finiteness::Finite: return "Finite";
    case Finiteness::Infinite: return "Infinite";
    default: return "Inconclusive";
  }
}

struct VolumeReport {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  Finiteness verdict = Finiteness::Inconclusive;
  ConvergenceVerdict windows;
};

/// Volume of the tube over [s_start, s_max]; finiteness is judged by the
/// window rule on [s_max / 32, s_max].
inline VolumeReport domain_volume(const TubeDomain& dom, double s_max,
                                  const WindowThresholds& thr = {}) {
  if (!(s_max > dom.s_start)) throw DomainError("s_max must exceed s_start");
  VolumeReport rep;
  auto log_density = [&](double s) { return detail::log_volume_density(dom, s); };
  QuadratureOptions o;
  o.rel_tol = 1e-9;
  // Integrate over dyadic pieces so the log shift stays local.
  double lo = dom.s_start;
  double log_total = -std::numeric_limits<double>::infinity();
  while (lo < s_max) {
    const double hi = std::min(s_max, std::max(2.0 * lo, lo + 1.0));
    auto res = integrate_log(log_density, lo, hi, o);
    if (!res.converged && res.rel_error > 1e-6) {
      throw IntegrationError("volume quadrature failed on [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
    }
    log_total = log_add_exp(log_total, res.log_value);
    lo = hi;
  }
  rep.log_value = log_total;
  rep.value = std::exp(log_total);
  const double w0 = std::max(s_max / 32.0, std::nextafter(dom.s_start, s_max));
  rep.windows = improper_integral_verdict_log(log_density, w0, s_max, thr);
  switch (rep.windows.kind) {
    case ConvergenceKind::Convergent: rep.verdict = Finiteness::Finite; break;
    case ConvergenceKind::Divergent: rep.verdict = Finiteness::Infinite; break;
    default: rep.verdict = Finiteness::Inconclusive;
  }
  return rep;
}

/// Generator of the orbit process: 1/2 (d_ss + b_s d_s + sigma_r^2 d_rr + b_r d_r).
struct OrbitCoeffs {
  double b_s = 0.0;
  double b_r = 0.0;
  double sigma_r = 1.0;
};

inline OrbitCoeffs orbit_coeffs(const WarpedModel& model, double s, double r) {
  const double th = model.theta(s);
  const double ph = model.phi(s);
  OrbitCoeffs c;
  c.b_s = (model.p - 1) * model.theta.d1(s) / th + model.q * model.phi.d1(s) / ph;
  c.b_r = (model.q - 1) * model.xi.d1(r) / (model.xi(r) * ph * ph);
  c.sigma_r = 1.0 / ph;
  return c;
}

/// Max-norm residual of d_r Psi(s, f(s)) + phi W nu, relative to the size of
/// d_r Psi. d_r Psi is built from the r-derivative of the level function F,
/// not from the closed form.
inline double boundary_orthogonality_residual(const TubeDomain& dom, double s) {
  const double ph = dom.model.phi(s);
  const double fv = dom.f(s);
  const double fp = dom.f.d1(s);
  const double xf = dom.model.xi(fv);
  const double xdf = dom.model.xi.d1(fv);
  const double L = fp / (xf * xdf);
  // d_r F(s, r) = -phi^2 L xi(r) xi'(r), evaluated at r = f(s).
  const double dF_dr = -ph * ph * L * xf * xdf;
  const auto fr = normal_frame(dom, s);
  const double rs = dF_dr + ph * fr.W * fr.nu_s;
  const double rr = 1.0 + ph * fr.W * fr.nu_r;
  const double scale = std::max(1.0, std::abs(dF_dr));
  return std::max(std::abs(rs), std::abs(rr)) / scale;
}

// ---------------------------------------------------------------------------
// Grids.

/// Geometric grid s0, s0*ratio, ... up to and including s1.
inline std::vector<double> geometric_grid(double s0, double s1,
                                          double ratio = std::pow(2.0, 0.25)) {
  if (!(s0 > 0.0) || !(s1 >= s0) || !(ratio > 1.0)) {
    throw DomainError("bad geometric grid parameters");
  }
  std::vector<double> g;
  const int n = static_cast<int>(std::ceil(std::log(s1 / s0) / std::log(ratio) - 1e-9));
  for (int i = 0; i <= n; ++i) g.push_back(std::min(s1, s0 * std::pow(ratio, i)));
  g.back() = s1;
  if (g.size() >= 2 && g[g.size() - 2] >= g.back()) g.erase(g.end() - 2);
  return g;
}

/// n uniformly spaced points on [0, f], both ends included.
inline std::vector<double> fiber_grid(double f, int n = 64) {
  if (n < 2) throw DomainError("fiber grid needs at least two points");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = f * static_cast<double>(i) / (n - 1);
  g.back() = f;
  return g;
}

// ---------------------------------------------------------------------------
// Builtin domains.

/// Euclidean base and fiber: theta = s, phi = 1, xi = r, f = (1+s)^alpha.
inline TubeDomain flat_domain(int p, int q, double alpha) {
  TubeDomain d;
  d.model = {p, q, linear_profile(), const_profile(1.0), linear_profile()};
  d.f = power_profile(alpha);
  d.label = "flat(p=" + std::to_string(p) + ",q=" + std::to_string(q) +
            ",f=" + d.f.label() + ")";
  return d;
}

/// Hyperbolic space: theta = sinh, phi = cosh, xi = sinh, f = e^(alpha s).
inline TubeDomain hyperbolic_domain(int p, int q, double alpha) {
  TubeDomain d;
  d.model = {p, q, sinh_profile(), cosh_profile(), sinh_profile()};
  d.f = exp_profile(alpha);
  d.label = "hyperbolic(p=" + std::to_string(p) + ",q=" + std::to_string(q) +
            ",f=" + d.f.label() + ")";
  return d;
}

/// f = 1, phi = 1, xi = r, with the given base profile.
inline TubeDomain model_space_domain(int p, int q, const ScalarProfile& theta) {
  TubeDomain d;
  d.model = {p, q, theta, const_profile(1.0), linear_profile()};
  d.f = const_profile(1.0);
  d.label = "model(p=" + std::to_string(p) + ",theta=" + theta.label() + ")";
  return d;
}

/// Tube in the Schwarzschild-type space; xi = r (eps = 0) or sinh (eps = -1).
inline TubeDomain schwarzschild_domain(double m, int eps, int p, int q,
                                       const ScalarProfile& f, double s_start,
                                       double s_max) {
  auto pair = schwarzschild_cached(m, eps, p, s_max);
  TubeDomain d;
  d.model = {p, q, pair.theta, pair.phi, eps == 0 ? linear_profile() : sinh_profile()};
  d.f = f;
  d.s_start = s_start;
  d.label = "schwarzschild(m=" + detail::PowerProfile::fmt(m) + ",eps=" + std::to_string(eps) +
            ",p=" + std::to_string(p) + ",q=" + std::to_string(q) + ",f=" + f.label() +
            ")";
  return d;
}

}  // namespace warptube
