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
#include <vector>

#include "warptube/geometry.hpp"

using namespace warptube;

namespace {

std::vector<TubeDomain> builtin_domains() {
  return {flat_domain(2, 1, -0.5), flat_domain(3, 2, 0.5), flat_domain(3, 1, -1.0),
          hyperbolic_domain(2, 1, -3.0), hyperbolic_domain(3, 2, -1.5),
          model_space_domain(3, 1, linear_profile()),
          schwarzschild_domain(0.5, 0, 3, 1, power_profile(-1.0), 1.0, 200.0)};
}

}  // namespace

TEST(Geometry, NormalFrameExamples) {
  TubeDomain d = model_space_domain(2, 1, linear_profile());
  auto fr = normal_frame(d, 3.0);
  EXPECT_DOUBLE_EQ(fr.W, 1.0);
  EXPECT_DOUBLE_EQ(fr.nu_s, 0.0);
  EXPECT_DOUBLE_EQ(fr.nu_r, -1.0);

  TubeDomain lin = flat_domain(2, 1, 1.0);
  lin.f = linear_profile();
  fr = normal_frame(lin, 1.0);
  EXPECT_NEAR(fr.W, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(fr.nu_s, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(fr.nu_r, -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Geometry, NormalFrameHyperbolicOracle) {
  auto d = hyperbolic_domain(2, 1, -2.0);
  // Written out directly: phi = cosh 1, f' = -2 e^{-2}.
  const double ph = std::cosh(1.0);
  const double fp = -2.0 * std::exp(-2.0);
  const double W = std::sqrt(1.0 + ph * ph * fp * fp);
  auto fr = normal_frame(d, 1.0);
  EXPECT_NEAR(fr.W, W, 1e-12);
  EXPECT_NEAR(fr.nu_s, ph * fp / W, 1e-12);
  EXPECT_NEAR(fr.nu_r, -1.0 / (ph * W), 1e-12);
}

TEST(Geometry, FrameInvariantsOnBuiltins) {
  for (const auto& d : builtin_domains()) {
    for (double s : geometric_grid(std::max(1.0, d.s_start + 0.5), 150.0)) {
      auto fr = normal_frame(d, s);
      const double ph = d.model.phi(s);
      EXPECT_NEAR(fr.nu_s * fr.nu_s + ph * ph * fr.nu_r * fr.nu_r, 1.0, 1e-12) << d.label;
      EXPECT_LT(fr.nu_r, 0.0);
      EXPECT_LE(boundary_orthogonality_residual(d, s), 1e-10) << d.label << " " << s;
    }
  }
}

TEST(Geometry, VolumeElement) {
  auto f21 = flat_domain(2, 1, 0.0);
  EXPECT_DOUBLE_EQ(volume_element(f21.model, 3.0, 0.2), 3.0);
  auto f32 = flat_domain(3, 2, 0.0);
  EXPECT_DOUBLE_EQ(volume_element(f32.model, 2.0, 0.5), 2.0);
  auto h22 = hyperbolic_domain(2, 2, -1.0);
  const double oracle = std::sinh(1.0) * std::cosh(1.0) * std::cosh(1.0) * std::sinh(0.3);
  EXPECT_NEAR(volume_element(h22.model, 1.0, 0.3), oracle, 1e-12);
}

TEST(Geometry, OrbitCoefficients) {
  auto c = orbit_coeffs(flat_domain(2, 1, 0.0).model, 2.0, 0.1);
  EXPECT_DOUBLE_EQ(c.b_s, 0.5);
  EXPECT_DOUBLE_EQ(c.b_r, 0.0);
  EXPECT_DOUBLE_EQ(c.sigma_r, 1.0);
  c = orbit_coeffs(flat_domain(3, 2, 0.0).model, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(c.b_s, 2.0);
  EXPECT_DOUBLE_EQ(c.b_r, 2.0);
  c = orbit_coeffs(hyperbolic_domain(2, 1, -1.0).model, 1.0, 0.1);
  EXPECT_NEAR(c.b_s, std::cosh(1.0) / std::sinh(1.0) + std::sinh(1.0) / std::cosh(1.0),
              1e-12);
  EXPECT_NEAR(c.sigma_r, 1.0 / std::cosh(1.0), 1e-12);
}

TEST(Geometry, OrthogonalityExamples) {
  EXPECT_EQ(boundary_orthogonality_residual(model_space_domain(2, 1, linear_profile()), 2.0),
            0.0);
  EXPECT_LT(boundary_orthogonality_residual(flat_domain(2, 1, -0.5), 4.0), 1e-10);
  EXPECT_LT(boundary_orthogonality_residual(hyperbolic_domain(2, 1, -2.0), 2.0), 1e-10);
}

TEST(Geometry, VolumeFiniteness) {
  EXPECT_EQ(domain_volume(flat_domain(2, 1, -3.0), std::pow(2.0, 20)).verdict,
            Finiteness::Finite);
  EXPECT_EQ(domain_volume(flat_domain(2, 1, -1.0), std::pow(2.0, 20)).verdict,
            Finiteness::Infinite);
  EXPECT_EQ(domain_volume(hyperbolic_domain(2, 1, -2.0), 176.0).verdict,
            Finiteness::Infinite);
  EXPECT_EQ(domain_volume(hyperbolic_domain(2, 1, -2.5), 176.0).verdict,
            Finiteness::Finite);
}

TEST(Geometry, VolumeValueAndMonotonicity) {
  // Flat p = 2, q = 2, f = 1/(1+s): integral of s (1+s)^-2 / 2 over [0, S].
  auto d = flat_domain(2, 2, -1.0);
  const double S = 40.0;
  const double exact = 0.5 * (std::log1p(S) + 1.0 / (1.0 + S) - 1.0);
  EXPECT_NEAR(domain_volume(d, S).value, exact, 1e-9 * exact);
  double prev = 0.0;
  for (double sm : {20.0, 40.0, 80.0}) {
    const double v = domain_volume(d, sm).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_GE(domain_volume(flat_domain(2, 2, -0.5), S).value,
            domain_volume(flat_domain(2, 2, -1.0), S).value);
  auto h1 = hyperbolic_domain(2, 2, -2.0);
  auto h2 = hyperbolic_domain(2, 2, -1.5);
  EXPECT_GE(domain_volume(h2, 30.0).value, domain_volume(h1, 30.0).value);
}

TEST(Geometry, Grids) {
  auto g = geometric_grid(1.0, 16.0);
  EXPECT_EQ(g.size(), 17u);
  EXPECT_DOUBLE_EQ(g.back(), 16.0);
  auto r = fiber_grid(0.5, 64);
  EXPECT_EQ(r.size(), 64u);
  EXPECT_EQ(r.front(), 0.0);
  EXPECT_EQ(r.back(), 0.5);
}

TEST(Geometry, ModelValidation) {
  auto d = hyperbolic_domain(2, 1, -2.0);
  EXPECT_NO_THROW(d.model.validate(geometric_grid(1.0, 10.0), fiber_grid(1.0)));
  d.model.xi = function_profile("sin", 0.0, 2, [](double r, int k) {
    return k == 0 ? std::sin(r) : (k == 1 ? std::cos(r) : -std::sin(r));
  });
  EXPECT_THROW(d.model.validate(geometric_grid(1.0, 10.0), fiber_grid(1.0)), DomainError);
}
