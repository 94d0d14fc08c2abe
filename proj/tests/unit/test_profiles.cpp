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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "warptube/profiles.hpp"
#include "warptube/quadrature.hpp"

using namespace warptube;

namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

double central(const ScalarProfile& p, double s, int k) {
  const double h = 1e-5 * std::max(1.0, std::abs(s));
  return (p.eval(s + h, k) - p.eval(s - h, k)) / (2 * h);
}

}  // namespace

TEST(Profiles, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(sinh_profile().d1(0.0), 1.0);
  EXPECT_DOUBLE_EQ(power_profile(-1.0)(1.0), 0.5);
  EXPECT_DOUBLE_EQ(linear_profile()(3.0), 3.0);
  EXPECT_DOUBLE_EQ(const_profile(2.5).d2(7.0), 0.0);
  EXPECT_NEAR(exp_profile(-2.0).d2(1.0), 4.0 * std::exp(-2.0), 1e-15);
}

TEST(Profiles, StretchExpSecondDerivativeAgainstDifferenceOracle) {
  auto p = stretchexp_profile(-1.0, 2.0);
  // First derivative written out by hand: -2 s e^{-s^2}.
  auto d1 = [](double s) { return -2.0 * s * std::exp(-s * s); };
  const double h = 1e-5;
  const double oracle = (d1(1.0 + h) - d1(1.0 - h)) / (2 * h);
  EXPECT_NEAR(p.d2(1.0) / oracle, 1.0, 1e-6);
}

TEST(Profiles, DerivativeConsistencyAllFamilies) {
  const std::vector<std::string> ids = {"power(-0.5)", "power(1.7)", "linear",
                                        "sinh",        "cosh",       "const(3)",
                                        "exp(-2)",     "exp(0.3)",   "stretchexp(-1,1.5)"};
  for (const auto& id : ids) {
    auto p = parse_profile(id);
    for (double s : grid(0.2, 6.0, 25)) {
      for (int k = 0; k < p.analytic_order(); ++k) {
        const double fd = central(p, s, k);
        const double exact = p.eval(s, k + 1);
        EXPECT_NEAR(fd, exact, 1e-5 * std::max(1.0, std::abs(exact)))
            << id << " s=" << s << " k=" << k;
      }
    }
  }
}

TEST(Profiles, FallbackOrderMatchesAnalytic) {
  // Order 3 of sinh via differences of the order-2 closed form.
  auto p = sinh_profile();
  for (double s : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(p.eval(s, 3) / std::cosh(s), 1.0, 1e-5);
    EXPECT_NEAR(p.eval(s, 4) / std::sinh(s), 1.0, 1e-4);
  }
  // Near the domain start the stencil turns one-sided.
  EXPECT_NEAR(p.eval(0.0, 3), 1.0, 1e-5);
}

TEST(Profiles, Errors) {
  EXPECT_THROW(sinh_profile().eval(-1.0, 0), DomainError);
  EXPECT_THROW(sinh_profile().eval(1.0, 5), UnsupportedOrder);
  EXPECT_THROW(parse_profile("tanh"), DomainError);
  EXPECT_THROW(parse_profile("power(1,2)"), DomainError);
  EXPECT_THROW(parse_profile("power(x)"), DomainError);
  EXPECT_THROW(parse_profile("const(-1)"), DomainError);
}

TEST(Profiles, ParseAcceptsUnicodeMinus) {
  auto p = parse_profile("power(−1)");
  EXPECT_DOUBLE_EQ(p(1.0), 0.5);
  EXPECT_NEAR(parse_profile("stretchexp(-1, 2)")(1.0), std::exp(-1.0), 1e-15);
}

TEST(Profiles, ConvexityAudit) {
  const auto g1 = grid(0.01, 10.0, 200);
  auto rep = convexity_audit(linear_profile(), g1);
  EXPECT_TRUE(rep.passed);
  EXPECT_DOUBLE_EQ(rep.min_second, 0.0);
  EXPECT_DOUBLE_EQ(rep.min_first, 1.0);
  EXPECT_TRUE(convexity_audit(sinh_profile(), g1).passed);
  auto sine = function_profile("sin", 0.0, 2, [](double r, int k) {
    return k == 0 ? std::sin(r) : (k == 1 ? std::cos(r) : -std::sin(r));
  });
  EXPECT_FALSE(convexity_audit(sine, grid(0.01, 3.0, 100)).passed);
}

TEST(Schwarzschild, HorizonRoots) {
  EXPECT_NEAR(schwarzschild_build(0.5, 0, 3, 10.0).horizon_radius, 1.0, 1e-12);
  EXPECT_NEAR(schwarzschild_build(0.5, 0, 4, 10.0).horizon_radius, 1.0, 1e-12);
  // Independent bisection on 1 + R^2 - 2/R.
  double lo = 0.1, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1 + mid * mid - 2 / mid < 0 ? lo : hi) = mid;
  }
  auto pair = schwarzschild_build(1.0, -1, 3, 5.0);
  EXPECT_NEAR(pair.horizon_radius, 0.5 * (lo + hi), 1e-10);
  ZetaFunction z{1.0, -1, 3};
  EXPECT_NEAR(z(pair.horizon_radius), 0.0, 1e-12);
}

TEST(Schwarzschild, StartValues) {
  auto pair = schwarzschild_build(0.5, 0, 3, 20.0);
  EXPECT_DOUBLE_EQ(pair.phi(0.0), 0.0);
  EXPECT_DOUBLE_EQ(pair.theta(0.0), pair.horizon_radius);
  EXPECT_DOUBLE_EQ(pair.theta.d1(0.0), 0.0);
  // phi'(0+) finite and positive; zeta'(1)/2 = 1/2 here.
  const double h = 1e-4;
  const double slope = (pair.phi(2 * h) - pair.phi(h)) / h;
  EXPECT_GT(slope, 0.0);
  EXPECT_NEAR(slope, 0.5, 1e-3);
}

TEST(Schwarzschild, NoRootThrows) {
  EXPECT_THROW(zeta_root(ZetaFunction{0.5, 1, 3}), RootNotFound);
}

TEST(Schwarzschild, MatchesQuadratureOfInverseMap) {
  // s(R) = integral of dR / sqrt(zeta) from the horizon; substitute
  // R = R0 + u^2 to remove the endpoint singularity.
  for (auto [m, eps, p] : {std::tuple{0.5, 0, 3}, std::tuple{1.0, -1, 3},
                           std::tuple{0.5, 0, 4}}) {
    auto pair = schwarzschild_build(m, eps, p, 6.0);
    ZetaFunction z{m, eps, p};
    const double R0 = pair.horizon_radius;
    for (double R : {R0 + 0.01, R0 + 0.3, R0 + 1.5, R0 + 3.0}) {
      auto res = integrate(
          [&](double u) {
            const double rr = R0 + u * u;
            return u == 0.0 ? 2.0 / std::sqrt(z.d1(R0)) : 2.0 * u / std::sqrt(z(rr));
          },
          0.0, std::sqrt(R - R0));
      const double s = res.value;
      if (s > 6.0) continue;
      EXPECT_NEAR(pair.theta(s), R, 1e-8 * R) << m << " " << eps << " " << p;
      EXPECT_NEAR(pair.phi(s), std::sqrt(z(R)), 1e-7);
    }
  }
}

TEST(Schwarzschild, DerivativeConsistency) {
  auto pair = schwarzschild_build(0.5, 0, 3, 50.0);
  for (double s : grid(0.05, 40.0, 30)) {
    for (const auto* prof : {&pair.theta, &pair.phi}) {
      for (int k = 0; k < 2; ++k) {
        const double exact = prof->eval(s, k + 1);
        EXPECT_NEAR(central(*prof, s, k), exact, 1e-5 * std::max(1.0, std::abs(exact)))
            << prof->label() << " s=" << s;
      }
    }
  }
}

TEST(Schwarzschild, AsymptoticallyFlat) {
  // p = 4 at 100 R0; p = 3 carries a logarithmic correction and needs 1000 R0.
  auto p4 = schwarzschild_build(0.5, 0, 4, 100.0);
  EXPECT_NEAR(p4.theta(100.0) / 100.0, 1.0, 0.02);
  EXPECT_NEAR(p4.phi(100.0), 1.0, 0.02);
  auto p3 = schwarzschild_build(0.5, 0, 3, 1000.0);
  EXPECT_NEAR(p3.theta(1000.0) / 1000.0, 1.0, 0.02);
  EXPECT_NEAR(p3.phi(1000.0), 1.0, 0.02);
}

TEST(Schwarzschild, ParseSharesTable) {
  auto th = parse_profile("schwarzschild(0.5,0,3):theta", 30.0);
  auto ph = parse_profile("schwarzschild(0.5,0,3):phi", 30.0);
  EXPECT_NEAR(ph(2.0), std::sqrt(1.0 - 1.0 / th(2.0)), 1e-12);
  EXPECT_THROW(parse_profile("schwarzschild(0.5,0,3)"), DomainError);
  EXPECT_THROW(th(31.0), DomainError);
}
