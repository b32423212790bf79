// Copyright 2026 the rarebound authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rarebound/bayes.hpp"
#include "rarebound/normal.hpp"
#include "rarebound/rng.hpp"
#include "testutil.hpp"

using namespace rarebound;

namespace {

/// A model whose posterior at points far from its single design point has
/// mean `level` and standard deviation `sd` (the prior is recovered there).
GpModel far_field_model(double level, double sd) {
  Design d;
  d.points.resize(1, 2);
  d.points << 1e4, 1e4;
  d.outputs = Eigen::VectorXd::Constant(1, level);
  Eigen::VectorXd beta(1);
  beta << level;
  return GpModel::from_parameters(d, TrendSpec::intercept(),
                                  KernelSpec::isotropic(1.0), beta, sd * sd);
}

}  // namespace

TEST_CASE("bvn_cdf special values") {
  CHECK(bvn_cdf(0.3, -0.7, 0.0) == norm_cdf(0.3) * norm_cdf(-0.7));
  CHECK(bvn_cdf(0.3, -0.7, 1.0) == norm_cdf(-0.7));
  CHECK(bvn_cdf(0.3, -0.7, -1.0) ==
        std::max(0.0, norm_cdf(0.3) + norm_cdf(-0.7) - 1.0));
  CHECK(bvn_cdf(1.2, 10.0, 0.5) == doctest::Approx(norm_cdf(1.2)).epsilon(1e-12));
  CHECK(bvn_cdf(-10.0, 1.2, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // symmetry in the arguments
  for (const double r : {-0.8, 0.4, 0.95}) {
    CHECK(bvn_cdf(0.7, -1.1, r) ==
          doctest::Approx(bvn_cdf(-1.1, 0.7, r)).epsilon(1e-11));
  }
  // diagonal at full correlation: variance of a Bernoulli
  const double u = 0.4;
  CHECK(bvn_cdf(u, u, 1.0) - norm_cdf(u) * norm_cdf(u) ==
        doctest::Approx(norm_cdf(u) * (1.0 - norm_cdf(u))).epsilon(1e-12));
}

TEST_CASE("bvn_cdf against Monte Carlo") {
  Rng rng(2026);
  const std::int64_t M = 1000000;
  for (const double r : {-0.9, 0.0, 0.5, 0.99}) {
    for (const auto& uv : {std::pair{-1.0, 0.5}, std::pair{0.3, 0.3},
                           std::pair{-2.0, 2.0}}) {
      const auto [u, v] = uv;
      std::int64_t count = 0;
      for (std::int64_t i = 0; i < M; ++i) {
        const double z1 = rng.normal();
        const double z2 = r * z1 + std::sqrt(1.0 - r * r) * rng.normal();
        if (z1 <= u && z2 <= v) ++count;
      }
      const double mc = static_cast<double>(count) / M;
      const double se = std::sqrt(std::max(mc * (1.0 - mc), 1e-12) / M);
      CAPTURE(r);
      CAPTURE(u);
      CAPTURE(v);
      CHECK(std::abs(bvn_cdf(u, v, r) - mc) <= 3.0 * se);
    }
  }
}

TEST_CASE("posterior pi mean") {
  const InputDistribution dist =
      InputDistribution::uniform_on_box(Box::cube(0.0, 1.0, 2));
  SUBCASE("mean at the threshold gives one half") {
    const GpModel m = far_field_model(0.5, 0.2);
    const PiPosteriorSummary s = posterior_pi_mean(m, dist, 200000, 0.5, 4);
    CHECK(std::abs(s.mean - 0.5) <= 3.0 * s.se_mean + 1e-12);
  }
  SUBCASE("ten sigmas above the threshold is negligible") {
    const GpModel m = far_field_model(0.5 + 10.0 * 0.2, 0.2);
    const PiPosteriorSummary s = posterior_pi_mean(m, dist, 100000, 0.5, 4);
    CHECK(s.mean <= 1e-10);
  }
  SUBCASE("degenerate model reduces to the indicator") {
    Design d = lhs(8, 2, 3);
    d.outputs = Eigen::VectorXd::Constant(8, 2.0);
    const GpModel m = GpModel::fit(d, TrendSpec::intercept(), {}, 1);
    REQUIRE(m.degenerate());
    const InputDistribution unit =
        InputDistribution::uniform_on_box(Box::unit(2));
    CHECK(posterior_pi_mean(m, unit, 50000, 1.0, 9).mean == 0.0);
    CHECK(posterior_pi_mean(m, unit, 50000, 3.0, 9).mean == 1.0);
  }
  SUBCASE("toy model lands near the oracle order of magnitude") {
    const GpModel m = testutil::toy_model(50, 1001);
    const InputDistribution toy_dist =
        InputDistribution::uniform_on_box(toy_box());
    const PiPosteriorSummary s =
        posterior_pi_mean(m, toy_dist, 1000000, 0.01, 77, 2);
    CHECK(s.mean >= 1e-5);
    CHECK(s.mean <= 1e-2);
  }
}

TEST_CASE("posterior pi variance") {
  const InputDistribution dist =
      InputDistribution::uniform_on_box(Box::cube(0.0, 1.0, 2));
  SUBCASE("zero posterior variance everywhere") {
    Design d = lhs(8, 2, 3);
    d.outputs = Eigen::VectorXd::Constant(8, 2.0);
    const GpModel m = GpModel::fit(d, TrendSpec::intercept(), {}, 1);
    const InputDistribution unit =
        InputDistribution::uniform_on_box(Box::unit(2));
    const PiPosteriorSummary s = posterior_pi_variance(m, unit, 20000, 1.0, 5);
    CHECK(*s.variance == 0.0);
  }
  SUBCASE("toy variance is nonnegative and finite") {
    const GpModel m = testutil::toy_model(30, 2002);
    const InputDistribution toy_dist =
        InputDistribution::uniform_on_box(toy_box());
    const PiPosteriorSummary s =
        posterior_pi_variance(m, toy_dist, 30000, 0.01, 5);
    REQUIRE(s.variance.has_value());
    CHECK(*s.variance >= 0.0);
    CHECK(*s.variance <= 1.0);
    CHECK(s.noise_dominated == (*s.variance < 2.0 * s.se_variance));
  }
}

TEST_CASE("empirical upper quantile") {
  Eigen::VectorXd v(5);
  v << 0.5, 0.1, 0.4, 0.2, 0.3;
  CHECK(empirical_quantile_upper(v, 1.0) == 0.5);   // the maximum
  CHECK(empirical_quantile_upper(v, 0.0) == 0.1);   // clamped to the minimum
  CHECK(empirical_quantile_upper(v, 0.5) == 0.3);   // ceil(0.5*5) = 3rd
  CHECK(empirical_quantile_upper(v, 0.61) == 0.4);  // ceil = 4th
  double prev = 0.0;
  for (double q = 0.05; q <= 1.0; q += 0.05) {
    const double cur = empirical_quantile_upper(v, q);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("credible bound") {
  const InputDistribution dist = InputDistribution::uniform_on_box(toy_box());
  SUBCASE("degenerate model: point mass") {
    Design d = testutil::toy_design(12, 5);
    const GpModel m = GpModel::from_parameters(
        d, TrendSpec::intercept(), KernelSpec::isotropic(0.05),
        Eigen::VectorXd::Constant(1, d.outputs->mean()), 0.0);
    Design grid = scale_to_box(lhs(16, 2, 9), toy_box());
    grid = grid_repair(grid, d, toy_box(), 0.01 * toy_box().diagonal(), 3);
    const CredibleBoundResult res =
        credible_bound(m, dist, grid, 100, 10000, 0.5, 0.02, 11);
    for (int i = 1; i < res.pi_sample.size(); ++i)
      CHECK(res.pi_sample[i] == res.pi_sample[0]);
    CHECK(res.report.bound == res.pi_sample[0]);
  }
  SUBCASE("toy pipeline: sane bound, mean consistency, pi in [0,1]") {
    const GpModel m = testutil::toy_model(60, 77);
    Design grid = scale_to_box(lhs(64, 2, 13), toy_box());
    grid = grid_repair(grid, m.design(), toy_box(),
                       0.01 * toy_box().diagonal(), 8);
    const CredibleBoundResult res =
        credible_bound(m, dist, grid, 300, 20000, 0.01, 0.02, 21,
                       {.threads = 2});
    CHECK(res.report.level == doctest::Approx(0.98));
    CHECK(res.report.bound > 0.0);
    CHECK(res.report.bound < 0.05);
    for (int i = 0; i < res.pi_sample.size(); ++i) {
      CHECK(res.pi_sample[i] >= 0.0);
      CHECK(res.pi_sample[i] <= 1.0);
    }
    // mean of the realizations agrees with the direct posterior mean
    const PiPosteriorSummary pm = posterior_pi_mean(m, dist, 400000, 0.01, 3);
    const double sample_mean = res.pi_sample.mean();
    const double sd =
        std::sqrt((res.pi_sample.array() - sample_mean).square().sum() /
                  (res.pi_sample.size() - 1));
    const double se_comb = std::sqrt(
        pm.se_mean * pm.se_mean +
        sd * sd / static_cast<double>(res.pi_sample.size()));
    CHECK(std::abs(sample_mean - pm.mean) <= 4.0 * se_comb + 1e-6);
    // the bound is the empirical quantile of the sample
    CHECK(res.report.bound ==
          empirical_quantile_upper(res.pi_sample, 1.0 - 0.02));
  }
  SUBCASE("dimension guard") {
    Design d = lhs(30, 11, 4);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = d.points.row(i).squaredNorm();
    d.outputs = y;
    const GpModel m = GpModel::fit(d, TrendSpec::intercept(), {}, 2);
    const InputDistribution unit =
        InputDistribution::uniform_on_box(Box::unit(11));
    const Design grid = lhs(20, 11, 5);
    CHECK_THROWS_AS(
        credible_bound(m, unit, grid, 100, 10000, 0.5, 0.02, 1),
        PreconditionError);
    // explicit override runs
    const CredibleBoundResult res = credible_bound(
        m, unit, grid, 100, 10000, 0.5, 0.02, 1,
        {.allow_high_dim = true});
    CHECK(res.pi_sample.size() == 100);
  }
  SUBCASE("preconditions") {
    const GpModel m = testutil::toy_model(15, 3);
    const Design grid = scale_to_box(lhs(9, 2, 2), toy_box());
    CHECK_THROWS_AS(credible_bound(m, dist, grid, 50, 10000, 0.01, 0.02, 1),
                    PreconditionError);
    CHECK_THROWS_AS(credible_bound(m, dist, grid, 100, 5000, 0.01, 0.02, 1),
                    PreconditionError);
  }
}
