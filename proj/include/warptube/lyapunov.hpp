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

// Level-set chart rho = F(s, r), the auxiliary quantities of the Lyapunov
// construction, the bounding functions Gamma+/- and the profiles psi+/-.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "warptube/error.hpp"
#include "warptube/geometry.hpp"
#include "warptube/quadrature.hpp"

namespace warptube {

/// Quantities that depend on s only.
struct SliceQuantities {
  double s = 0.0;
  double theta = 0.0, dtheta = 0.0;
  double phi = 0.0, dphi = 0.0;
  double f = 0.0, df = 0.0, d2f = 0.0;
  double X = 0.0, Xd = 0.0, Xdd = 0.0;  // xi, xi', xi'' at r = f(s)
  double one_minus_Xd2 = 0.0;          // 1 - xi'(f)^2, cancellation free
  double L = 0.0, dL = 0.0;
  double E = 0.0, dE = 0.0;
  double N = 0.0, dN = 0.0, d2N = 0.0;
};

namespace detail {

inline SliceQuantities slice_base(const TubeDomain& dom, double s) {
  const auto& m = dom.model;
  SliceQuantities q;
  q.s = s;
  q.theta = m.theta(s);
  q.dtheta = m.theta.d1(s);
  q.phi = m.phi(s);
  q.dphi = m.phi.d1(s);
  q.f = dom.f(s);
  q.df = dom.f.d1(s);
  q.d2f = dom.f.d2(s);
  q.X = m.xi(q.f);
  q.Xd = m.xi.d1(q.f);
  q.Xdd = m.xi.d2(q.f);
  q.one_minus_Xd2 = one_minus_xidot_sq(m.xi, q.f);
  const double XXd = q.X * q.Xd;
  q.L = q.df / XXd;
  // Grouped so that xi(f)^2 is never formed; it underflows for thin tubes.
  q.dL = (q.d2f - q.L * q.df * (q.Xd * q.Xd + q.X * q.Xdd)) / XXd;
  const double p2 = q.phi * q.phi;
  q.E = 2.0 * q.phi * q.dphi * q.L + p2 * q.dL;
  q.N = p2 * q.df * q.X / q.Xd;
  q.dN = 2.0 * q.phi * q.dphi * q.df * q.X / q.Xd + p2 * q.d2f * q.X / q.Xd +
         p2 * q.df * q.df - p2 * q.df * q.df * q.X * q.Xdd / (q.Xd * q.Xd);
  return q;
}

}  // namespace detail

/// All s-dependent quantities, with E' and N'' by central differences of the
/// closed forms of E and N' (one-sided next to the ends of the domain).
inline SliceQuantities slice(const TubeDomain& dom, double s) {
  SliceQuantities q = detail::slice_base(dom, s);
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, s);
  const double lo = std::max({dom.s_start, dom.model.theta.domain_start(),
                              dom.model.phi.domain_start(), dom.f.domain_start()});
  const double hi = dom.s_end();
  if (s - h >= lo && s + h <= hi) {
    const auto a = detail::slice_base(dom, s - h);
    const auto b = detail::slice_base(dom, s + h);
    q.dE = (b.E - a.E) / (2.0 * h);
    q.d2N = (b.dN - a.dN) / (2.0 * h);
  } else {
    const double hs = s + 2.0 * h <= hi ? h : -h;
    const auto a = detail::slice_base(dom, s + hs);
    const auto b = detail::slice_base(dom, s + 2.0 * hs);
    q.dE = (-3.0 * q.E + 4.0 * a.E - b.E) / (2.0 * hs);
    q.d2N = (-3.0 * q.dN + 4.0 * a.dN - b.dN) / (2.0 * hs);
  }
  return q;
}

/// rho = F(s, r) = s - phi^2 L xi(r)^2 / 2 + N / 2.
inline double F_map(const SliceQuantities& q, double xi_r) {
  return q.s - 0.5 * q.phi * q.phi * q.L * xi_r * xi_r + 0.5 * q.N;
}

inline double F_map(const TubeDomain& dom, double s, double r) {
  return F_map(detail::slice_base(dom, s), dom.model.xi(r));
}

struct AuxQuantities {
  double L = 0.0, E = 0.0, N = 0.0, Nprime = 0.0;
  double C = 1.0, Cprime = 0.0;
  double G = 1.0, Gprime = 0.0, H = 1.0, A = 1.0;
  double BoverA = 0.0;
  double F = 0.0;
  // Chart-corrected logarithmic derivatives C theta_rho(F)/theta(F) and the
  // same for phi.
  double theta_ratio = 0.0, phi_ratio = 0.0;
  std::array<double, 12> terms{};
};

namespace detail {

/// Fills everything in AuxQuantities except BoverA and terms. Does not throw
/// on C <= 0.
inline AuxQuantities aux_unchecked(const TubeDomain& dom, const SliceQuantities& q,
                                   double r) {
  const auto& m = dom.model;
  AuxQuantities a;
  const double x = m.xi(r);
  const double xd = m.xi.d1(r);
  const double x2 = x * x;
  const double p2 = q.phi * q.phi;
  a.L = q.L;
  a.E = q.E;
  a.N = q.N;
  a.Nprime = q.dN;
  a.C = 1.0 - 0.5 * q.E * x2 + 0.5 * q.dN;
  a.Cprime = -0.5 * q.dE * x2 + 0.5 * q.d2N;
  a.G = 1.0 + p2 * q.L * q.L * x2 * xd * xd;
  a.Gprime = x2 * xd * xd * (2.0 * q.phi * q.dphi * q.L * q.L + 2.0 * p2 * q.L * q.dL);
  a.H = a.G / (xd * xd);
  a.A = a.G / (a.C * a.C);
  a.F = F_map(q, x);
  return a;
}

}  // namespace detail

/// Auxiliary quantities and the rearranged B/A at (s, r). Throws
/// DegenerateChart when C <= 0.
inline AuxQuantities aux(const TubeDomain& dom, const SliceQuantities& q, double r) {
  const auto& m = dom.model;
  AuxQuantities a = detail::aux_unchecked(dom, q, r);
  if (!(a.C > 0.0)) {
    throw DegenerateChart("C = " + std::to_string(a.C) + " at s = " + std::to_string(q.s) +
                          ", r = " + std::to_string(r));
  }
  if (a.F < m.theta.domain_start() || a.F < m.phi.domain_start() ||
      a.F > std::min(m.theta.domain_end(), m.phi.domain_end())) {
    throw DegenerateChart("level value F = " + std::to_string(a.F) +
                          " leaves the base range at s = " + std::to_string(q.s));
  }
  const int p = m.p;
  const int qd = m.q;
  const double x = m.xi(r);
  const double xd = m.xi.d1(r);
  const double xdd = m.xi.d2(r);
  const double x2 = x * x;
  const double p2 = q.phi * q.phi;
  const double L = q.L;
  a.theta_ratio = a.C * m.theta.d1(a.F) / m.theta(a.F);
  a.phi_ratio = a.C * m.phi.d1(a.F) / m.phi(a.F);
  const double w = x2 * p2 * L * L / a.H;
  auto& T = a.terms;
  T[0] = -a.Cprime / a.C;
  T[1] = (2.0 - 0.5 * qd) * a.Gprime / a.G;
  T[2] = (p - 1) * a.theta_ratio;
  T[3] = qd * a.phi_ratio;
  T[4] = qd * L;
  T[5] = 0.5 * qd * L * q.dN;
  T[6] = (0.5 * qd - 2.0) * x2 * p2 * L * q.dL / a.H;
  T[7] = -(p - 1) * a.theta_ratio * w;
  T[8] = -qd * a.phi_ratio * w;
  T[9] = -qd * x2 * p2 * L * L * L * (1.0 + 0.5 * q.dN) / a.H;
  T[10] = a.C * L * x * xdd / (a.H * xd * xd);
  T[11] = -qd * L * (a.C + 0.5 * q.E * x2) * one_minus_xidot_sq(m.xi, r) /
          (a.H * xd * xd);
  double sum = 0.0;
  for (double t : T) sum += t;
  a.BoverA = sum;
  return a;
}

inline AuxQuantities aux(const TubeDomain& dom, double s, double r) {
  return aux(dom, slice(dom, s), r);
}

inline double ba_ratio(const TubeDomain& dom, double s, double r) {
  return aux(dom, s, r).BoverA;
}

// ---------------------------------------------------------------------------
// K constants.

struct KConstants {
  std::array<double, 4> K{};
  std::array<double, 4> sup_ratio{};
};

namespace detail {

/// Right-hand sides of the four K inequalities (they depend on s only).
inline std::array<double, 4> k_rhs(const SliceQuantities& q) {
  const double p2 = q.phi * q.phi;
  const double af = std::abs(q.df);
  const double cube = p2 * af * af * af / q.X;
  return {af / q.X * std::abs(q.one_minus_Xd2) + q.X * q.Xdd,
          cube + p2 * af * std::abs(q.d2f), cube,
          p2 * (std::abs(q.dtheta) / q.theta + std::abs(q.dphi) / q.phi) * q.df * q.df};
}

inline std::array<double, 4> k_lhs(const AuxQuantities& a) {
  const auto& T = a.terms;
  return {std::abs(T[10] + T[11]), std::abs(T[6]), std::abs(T[9]),
          std::abs(T[7]) + std::abs(T[8])};
}

}  // namespace detail

/// Calibrates K0..K3 as 1.1 times the grid supremum of lhs/rhs (0/0 counts as
/// 0). Throws CalibrationError when a ratio exceeds 1e6 or a nonzero left
/// side meets a vanishing right side.
inline KConstants calibrate_K(const TubeDomain& dom, const std::vector<double>& s_grid,
                              int r_points = 64) {
  KConstants out;
  for (double s : s_grid) {
    const auto q = slice(dom, s);
    const auto rhs = detail::k_rhs(q);
    for (double r : fiber_grid(q.f, r_points)) {
      const auto lhs = detail::k_lhs(aux(dom, q, r));
      for (int i = 0; i < 4; ++i) {
        double ratio = 0.0;
        if (lhs[i] != 0.0) {
          // Allow round-off sized left sides against an exactly vanishing
          // right side.
          if (rhs[i] == 0.0) {
            if (lhs[i] > 1e-13) {
              throw CalibrationError("K" + std::to_string(i) +
                                     ": nonzero left side with vanishing bound at s = " +
                                     std::to_string(s));
            }
            continue;
          }
          ratio = lhs[i] / rhs[i];
        }
        if (!(ratio <= 1e6)) {
          throw CalibrationError("K" + std::to_string(i) + " ratio " + std::to_string(ratio) +
                                 " at s = " + std::to_string(s));
        }
        out.sup_ratio[i] = std::max(out.sup_ratio[i], ratio);
      }
    }
  }
  for (int i = 0; i < 4; ++i) out.K[i] = 1.1 * out.sup_ratio[i];
  return out;
}

// ---------------------------------------------------------------------------
// Gamma pair.

struct GammaPair {
  double gamma_minus = 0.0;
  double gamma_plus = 0.0;
  KConstants K;
  int r_grid_size = 0;
  // Fiber extremes, kept for reports.
  double C_min = 0.0;
  double Cr_min = 0.0, Cr_max = 0.0;  // C'/C
  double Gr_min = 0.0, Gr_max = 0.0;  // G'/G
  double theta_min = 0.0, theta_max = 0.0;
  double phi_min = 0.0, phi_max = 0.0;
};

inline GammaPair gamma_pair(const TubeDomain& dom, const SliceQuantities& q, int r_points,
                            const KConstants& K) {
  const auto& m = dom.model;
  GammaPair g;
  g.K = K;
  g.r_grid_size = r_points;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double Cmin = inf, crl = inf, crh = -inf, grl = inf, grh = -inf;
  double thl = inf, thh = -inf, phl = inf, phh = -inf;
  for (double r : fiber_grid(q.f, r_points)) {
    const auto a = aux(dom, q, r);
    Cmin = std::min(Cmin, a.C);
    const double cr = a.Cprime / a.C;
    const double gr = a.Gprime / a.G;
    crl = std::min(crl, cr);
    crh = std::max(crh, cr);
    grl = std::min(grl, gr);
    grh = std::max(grh, gr);
    thl = std::min(thl, a.theta_ratio);
    thh = std::max(thh, a.theta_ratio);
    phl = std::min(phl, a.phi_ratio);
    phh = std::max(phh, a.phi_ratio);
  }
  const int p = m.p, qd = m.q;
  const double base_plus = (p - 1) * thh + qd * phh + qd * q.L + 0.5 * qd * q.L * q.dN;
  const double base_minus = (p - 1) * thl + qd * phl + qd * q.L + 0.5 * qd * q.L * q.dN;
  const double p2 = q.phi * q.phi;
  const double af = std::abs(q.df);
  const auto rhs = detail::k_rhs(q);
  const double kterms = K.K[1] * p2 * af * std::abs(q.d2f) +
                        (K.K[1] + K.K[2]) * p2 * af * af * af / q.X + K.K[3] * rhs[3] +
                        K.K[0] * rhs[0];
  const double coef = 2.0 - 0.5 * qd;
  g.gamma_plus = base_plus + kterms - crl + coef * (coef >= 0.0 ? grh : grl);
  g.gamma_minus = base_minus - kterms - crh + coef * (coef >= 0.0 ? grl : grh);
  g.C_min = Cmin;
  g.Cr_min = crl;
  g.Cr_max = crh;
  g.Gr_min = grl;
  g.Gr_max = grh;
  g.theta_min = thl;
  g.theta_max = thh;
  g.phi_min = phl;
  g.phi_max = phh;
  return g;
}

inline GammaPair gamma_pair(const TubeDomain& dom, double s, int r_points,
                            const KConstants& K) {
  return gamma_pair(dom, slice(dom, s), r_points, K);
}

// ---------------------------------------------------------------------------
// Chart start.

/// Smallest s0 on a 2^(1/8) geometric grid over [s_lo, s_hi] such that
/// min over fibers of C is at least c_min at every grid point from s0 on.
inline double chart_s0(const TubeDomain& dom, double s_lo, double s_hi, int r_points = 64,
                       double c_min = 0.1) {
  const auto grid = geometric_grid(s_lo, s_hi, std::pow(2.0, 0.125));
  std::optional<std::size_t> last_bad;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool ok = true;
    try {
      const auto q = slice(dom, grid[i]);
      for (double r : fiber_grid(q.f, r_points)) {
        const auto a = aux(dom, q, r);
        if (!(a.C >= c_min) || !std::isfinite(a.Cprime) || !std::isfinite(a.BoverA)) {
          ok = false;
          break;
        }
      }
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) last_bad = i;
  }
  if (!last_bad) return grid.front();
  if (*last_bad + 1 >= grid.size()) {
    throw DegenerateChart("C stays below " + std::to_string(c_min) + " up to s = " +
                          std::to_string(s_hi) + " for " + dom.label);
  }
  return grid[*last_bad + 1];
}

// ---------------------------------------------------------------------------
// Lyapunov table.

enum class Side { Plus, Minus };

struct LyapunovOptions {
  int r_points = 64;
  double max_ratio = 1.01;      // node spacing at most 1% of s
  double max_gamma_step = 0.2;  // node spacing at most this / |Gamma|
  std::optional<KConstants> K;  // calibrated on the table grid when empty
};

class LyapunovTable {
 public:
  double s0() const { return s_.front(); }
  double s_max() const { return s_.back(); }
  const std::vector<double>& s_grid() const { return s_; }
  const KConstants& K() const { return K_; }
  int r_points() const { return r_points_; }

  const std::vector<double>& gamma(Side side) const {
    return side == Side::Plus ? gp_ : gm_;
  }
  const std::vector<double>& Lambda_nodes(Side side) const {
    return side == Side::Plus ? lp_ : lm_;
  }
  const std::vector<double>& log_psi_nodes(Side side) const {
    return side == Side::Plus ? psip_ : psim_;
  }

  /// Integral of Gamma from s0 to s.
  double Lambda(double s, Side side) const {
    const std::size_t k = locate(s);
    const auto& lam = Lambda_nodes(side);
    const auto& gam = gamma(side);
    const double h = s_[k + 1] - s_[k];
    const double t = (s - s_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * lam[k] + (t3 - 2 * t2 + t) * h * gam[2 * k] +
           (-2 * t3 + 3 * t2) * lam[k + 1] + (t3 - t2) * h * gam[2 * k + 2];
  }

  double log_dpsi(double s, Side side) const { return -Lambda(s, side); }
  double dpsi(double s, Side side) const { return std::exp(-Lambda(s, side)); }

  double log_psi(double s, Side side) const {
    const std::size_t k = locate(s);
    const auto& lp = log_psi_nodes(side);
    if (s <= s_[k]) return lp[k];
    const double mid = 0.5 * (s_[k] + s);
    const double l0 = -Lambda(s_[k], side), lm = -Lambda(mid, side), l1 = -Lambda(s, side);
    return log_add_exp(lp[k], simpson_log(l0, lm, l1, s - s_[k]));
  }
  double psi(double s, Side side) const { return std::exp(log_psi(s, side)); }

  /// Gamma at s, recomputed with the table's constants.
  GammaPair gamma_at(const TubeDomain& dom, double s) const {
    return gamma_pair(dom, s, r_points_, K_);
  }

  friend LyapunovTable psi_pair(const TubeDomain&, double, double, const LyapunovOptions&);

 private:
  static double simpson_log(double l0, double lm, double l1, double h) {
    const double top = std::max({l0, lm, l1});
    const double sum = std::exp(l0 - top) + 4.0 * std::exp(lm - top) + std::exp(l1 - top);
    return top + std::log(sum * h / 6.0);
  }

  std::size_t locate(double s) const {
    if (s < s_.front() * (1 - 1e-12) || s > s_.back() * (1 + 1e-12)) {
      throw DomainError("s = " + std::to_string(s) + " outside the Lyapunov table");
    }
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - s_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, s_.size() - 2);
  }

  std::vector<double> s_;
  // Gamma at nodes and midpoints, interleaved: index 2k is node k, 2k+1 the
  // midpoint of [s_k, s_{k+1}].
  std::vector<double> gp_, gm_;
  std::vector<double> lp_, lm_;      // Lambda at nodes
  std::vector<double> psip_, psim_;  // log psi at nodes
  KConstants K_;
  int r_points_ = 64;
};

/// Tabulates psi+/- on [s0, s_max]. Node spacing is at most max_ratio - 1
/// relative and max_gamma_step / |Gamma| absolute, with |Gamma| estimated from
/// its r-independent part. Integrals are Simpson per interval; psi is
/// accumulated in the log domain.
inline LyapunovTable psi_pair(const TubeDomain& dom, double s0, double s_max,
                              const LyapunovOptions& opts = {}) {
  if (!(s0 > dom.s_start) || !(s_max > s0)) {
    throw DomainError("psi_pair needs s_start < s0 < s_max");
  }
  const auto& m = dom.model;
  LyapunovTable t;
  t.r_points_ = opts.r_points;
  // Node placement.
  t.s_.push_back(s0);
  while (t.s_.back() < s_max) {
    const double s = t.s_.back();
    const auto q = detail::slice_base(dom, s);
    const double scale = std::abs((m.p - 1) * q.dtheta / q.theta) +
                         std::abs(m.q * q.dphi / q.phi) + std::abs(m.q * q.L) +
                         std::abs(0.5 * m.q * q.L * q.dN);
    double h = (opts.max_ratio - 1.0) * s;
    if (scale > 0.0) h = std::min(h, opts.max_gamma_step / scale);
    h = std::max(h, 1e-9 * s);
    t.s_.push_back(std::min(s_max, s + h));
    if (s_max - t.s_.back() < 1e-9 * s_max) t.s_.back() = s_max;
  }
  const std::size_t n = t.s_.size();
  std::vector<double> all;  // nodes and midpoints
  for (std::size_t k = 0; k < n; ++k) {
    all.push_back(t.s_[k]);
    if (k + 1 < n) all.push_back(0.5 * (t.s_[k] + t.s_[k + 1]));
  }
  t.K_ = opts.K ? *opts.K : calibrate_K(dom, all, opts.r_points);
  t.gp_.resize(all.size());
  t.gm_.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto g = gamma_pair(dom, all[i], opts.r_points, t.K_);
    t.gp_[i] = g.gamma_plus;
    t.gm_[i] = g.gamma_minus;
  }
  auto build = [&](const std::vector<double>& gam, std::vector<double>& lam,
                   std::vector<double>& lpsi) {
    lam.assign(n, 0.0);
    lpsi.assign(n, -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double h = t.s_[k + 1] - t.s_[k];
      const double g0 = gam[2 * k], gm = gam[2 * k + 1], g1 = gam[2 * k + 2];
      lam[k + 1] = lam[k] + h / 6.0 * (g0 + 4.0 * gm + g1);
      // Lambda at the midpoint, from the quadratic through the three samples.
      const double lam_mid = lam[k] + h / 24.0 * (5.0 * g0 + 8.0 * gm - g1);
      lpsi[k + 1] = log_add_exp(
          lpsi[k], LyapunovTable::simpson_log(-lam[k], -lam_mid, -lam[k + 1], h));
    }
  };
  build(t.gp_, t.lp_, t.psip_);
  build(t.gm_, t.lm_, t.psim_);
  return t;
}

// ---------------------------------------------------------------------------
// Verification.

struct SandwichReport {
  double max_lower_violation = -std::numeric_limits<double>::infinity();  // Gamma- - B/A
  double max_upper_violation = -std::numeric_limits<double>::infinity();  // B/A - Gamma+
  double worst_excess = -std::numeric_limits<double>::infinity();  // violation - tolerance
  double worst_s = 0.0, worst_r = 0.0;
  KConstants K;
  bool passed = false;
  std::size_t points = 0;
  std::size_t violations = 0;
};

inline double sandwich_tolerance(double gamma, double rel_tol = 1e-6) {
  return 1e-8 + rel_tol * std::abs(gamma);
}

/// Checks Gamma- <= B/A <= Gamma+ on the grid, with K calibrated on the same
/// grid unless supplied.
inline SandwichReport verify_sandwich(const TubeDomain& dom, const std::vector<double>& s_grid,
                                      int r_points = 64,
                                      const std::optional<KConstants>& K = std::nullopt,
                                      double rel_tol = 1e-6) {
  SandwichReport rep;
  rep.K = K ? *K : calibrate_K(dom, s_grid, r_points);
  for (double s : s_grid) {
    const auto q = slice(dom, s);
    const auto g = gamma_pair(dom, q, r_points, rep.K);
    for (double r : fiber_grid(q.f, r_points)) {
      const double ba = aux(dom, q, r).BoverA;
      const double lower = g.gamma_minus - ba;
      const double upper = ba - g.gamma_plus;
      rep.max_lower_violation = std::max(rep.max_lower_violation, lower);
      rep.max_upper_violation = std::max(rep.max_upper_violation, upper);
      const double excess = std::max(lower - sandwich_tolerance(g.gamma_minus, rel_tol),
                                     upper - sandwich_tolerance(g.gamma_plus, rel_tol));
      if (excess > 0.0) ++rep.violations;
      if (excess > rep.worst_excess) {
        rep.worst_excess = excess;
        rep.worst_s = s;
        rep.worst_r = r;
      }
      ++rep.points;
    }
  }
  rep.passed = rep.worst_excess <= 0.0;
  return rep;
}

struct SignReport {
  // Delta u+/- divided by A psi'+/- (that is, B/A - Gamma+/-); the raw values
  // can leave the double range.
  double max_scaled_plus = -std::numeric_limits<double>::infinity();
  double min_scaled_minus = std::numeric_limits<double>::infinity();
  double max_excess = -std::numeric_limits<double>::infinity();
  double min_A = std::numeric_limits<double>::infinity();
  double min_dpsi_plus = std::numeric_limits<double>::infinity();
  double min_dpsi_minus = std::numeric_limits<double>::infinity();
  double max_laplacian_plus = -std::numeric_limits<double>::infinity();
  double min_laplacian_minus = std::numeric_limits<double>::infinity();
  bool passed = false;
};

/// Evaluates Delta u = A psi'' + B psi' with psi'' = -Gamma psi' for both
/// profiles of the table. Tolerance: rel_tol relative to |Gamma| + |B/A|.
inline SignReport verify_sign(const TubeDomain& dom, const LyapunovTable& table,
                              const std::vector<double>& s_grid, int r_points = 64,
                              double rel_tol = 1e-6) {
  SignReport rep;
  bool ok = true;
  for (double s : s_grid) {
    const auto q = slice(dom, s);
    const auto g = gamma_pair(dom, q, r_points, table.K());
    const double dpp = table.dpsi(s, Side::Plus);
    const double dpm = table.dpsi(s, Side::Minus);
    rep.min_dpsi_plus = std::min(rep.min_dpsi_plus, dpp);
    rep.min_dpsi_minus = std::min(rep.min_dpsi_minus, dpm);
    ok &= dpp > 0.0 && dpm > 0.0;
    for (double r : fiber_grid(q.f, r_points)) {
      const auto a = aux(dom, q, r);
      rep.min_A = std::min(rep.min_A, a.A);
      ok &= a.A > 0.0;
      const double B = a.A * a.BoverA;
      const double lap_plus = a.A * (-g.gamma_plus * dpp) + B * dpp;
      const double lap_minus = a.A * (-g.gamma_minus * dpm) + B * dpm;
      rep.max_laplacian_plus = std::max(rep.max_laplacian_plus, lap_plus);
      rep.min_laplacian_minus = std::min(rep.min_laplacian_minus, lap_minus);
      const double up = a.BoverA - g.gamma_plus;
      const double um = a.BoverA - g.gamma_minus;
      rep.max_scaled_plus = std::max(rep.max_scaled_plus, up);
      rep.min_scaled_minus = std::min(rep.min_scaled_minus, um);
      const double tol_p = rel_tol * (std::abs(g.gamma_plus) + std::abs(a.BoverA)) + 1e-12;
      const double tol_m = rel_tol * (std::abs(g.gamma_minus) + std::abs(a.BoverA)) + 1e-12;
      rep.max_excess = std::max({rep.max_excess, up - tol_p, -um - tol_m});
    }
  }
  rep.passed = ok && rep.max_excess <= 0.0;
  return rep;
}

struct AsymptoticReport {
  double deviation_plus = 0.0;
  double deviation_minus = 0.0;
  double max_deviation() const { return std::max(deviation_plus, deviation_minus); }
};

/// Largest |log psi'(t) - log of the integrand-of-I ratio| over the table nodes.
inline AsymptoticReport asymptotic_match(const TubeDomain& dom, const LyapunovTable& table) {
  const auto& m = dom.model;
  const double s0 = table.s0();
  auto log_ref = [&](double t) {
    return (1 - m.p) * (m.theta.log_value(t) - m.theta.log_value(s0)) -
           m.q * (m.phi.log_value(t) - m.phi.log_value(s0)) -
           m.q * (m.xi.log_value(dom.f(t)) - m.xi.log_value(dom.f(s0)));
  };
  AsymptoticReport rep;
  const auto& grid = table.s_grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double ref = log_ref(grid[k]);
    rep.deviation_plus = std::max(rep.deviation_plus,
                                  std::abs(-table.Lambda_nodes(Side::Plus)[k] - ref));
    rep.deviation_minus = std::max(rep.deviation_minus,
                                   std::abs(-table.Lambda_nodes(Side::Minus)[k] - ref));
  }
  return rep;
}

inline AsymptoticReport asymptotic_match(const TubeDomain& dom, double s0, double s_max,
                                         const LyapunovOptions& opts = {}) {
  return asymptotic_match(dom, psi_pair(dom, s0, s_max, opts));
}

}  // namespace warptube
