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

#include <algorithm>
#include <cstdio>
#include <set>

#include "rarebound/design.hpp"
#include "rarebound/kriging.hpp"

using namespace rarebound;

namespace {

bool is_latin(const Design& d) {
  const int n = d.n();
  for (int j = 0; j < d.dim(); ++j) {
    std::set<int> strata;
    for (int i = 0; i < n; ++i) {
      const double v = d.points(i, j);
      if (v < 0.0 || v >= 1.0) return false;
      strata.insert(static_cast<int>(v * n));
    }
    if (static_cast<int>(strata.size()) != n) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("lhs stratification") {
  SUBCASE("n=2 d=1") {
    const Design d = lhs(2, 1, 3);
    std::vector<double> v{d.points(0, 0), d.points(1, 0)};
    std::sort(v.begin(), v.end());
    CHECK(v[0] >= 0.0);
    CHECK(v[0] < 0.5);
    CHECK(v[1] >= 0.5);
    CHECK(v[1] < 1.0);
  }
  SUBCASE("n=5 d=2 latin property") {
    const Design d = lhs(5, 2, 17);
    CHECK(is_latin(d));
  }
  SUBCASE("determinism") {
    const Design a = lhs(13, 3, 2024);
    const Design b = lhs(13, 3, 2024);
    CHECK(a.points == b.points);
    const Design c = lhs(13, 3, 2025);
    CHECK(a.points != c.points);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(lhs(1, 2, 0), PreconditionError);
    CHECK_THROWS_AS(lhs(4, 0, 0), PreconditionError);
  }
}

TEST_CASE("maximin annealing") {
  SUBCASE("zero iterations returns the input") {
    const Design d = lhs(8, 2, 5);
    const Design out = maximin_anneal(d, 0, {}, 9);
    CHECK(out.points == d.points);
  }
  SUBCASE("never degrades the minimum distance, preserves latin") {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const Design d = lhs(15, 2, seed);
      const double before = d.min_pairwise_distance();
      const Design out = maximin_anneal(d, 2000, {}, seed + 100);
      CHECK(out.min_pairwise_distance() >= before);
      CHECK(is_latin(out));
    }
  }
  SUBCASE("n=2 d=1: swap cannot change the distance") {
    const Design d = lhs(2, 1, 7);
    const Design out = maximin_anneal(d, 50, {}, 3);
    CHECK(out.min_pairwise_distance() ==
          doctest::Approx(d.min_pairwise_distance()));
  }
  SUBCASE("improvement frequency fixture: n=20 d=2, 1e4 iterations") {
    // regression fixture: strict improvement count over 100 seeded runs
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Design d = lhs(20, 2, seed);
      const Design out = maximin_anneal(d, 10000, {}, derive_seed(seed, 1));
      if (out.min_pairwise_distance() > d.min_pairwise_distance()) ++improved;
    }
    CHECK(improved >= 95);
    CHECK(improved == 100);  // frozen outcome of this exact configuration
  }
}

TEST_CASE("box scaling") {
  const Box box = Box::cube(-10.0, 10.0, 2);
  Design d;
  d.points.resize(3, 2);
  d.points << 0.5, 0.5, 0.0, 1.0, 0.25, 0.75;
  const Design scaled = scale_to_box(d, box);
  CHECK(scaled.points(0, 0) == doctest::Approx(0.0));
  CHECK(scaled.points(0, 1) == doctest::Approx(0.0));
  CHECK(scaled.points(1, 0) == doctest::Approx(-10.0));
  CHECK(scaled.points(1, 1) == doctest::Approx(10.0));
  const Design back = scale_to_unit(scaled, box);
  CHECK((back.points - d.points).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sequential augmentation scores") {
  // one observation at the origin, fixed parameters
  Design d;
  d.points.resize(1, 1);
  d.points << 0.0;
  d.outputs = Eigen::VectorXd::Constant(1, 1.0);
  const GpModel model =
      GpModel::from_parameters(d, TrendSpec::intercept(), KernelSpec::isotropic(1.0),
                               Eigen::VectorXd::Zero(1), 1.0);

  SUBCASE("single candidate wins") {
    Eigen::MatrixXd cand(1, 1);
    cand << 2.0;
    CHECK(sequential_augment(model, 0.5, cand)(0) == 2.0);
  }
  SUBCASE("interpolated design point is never selected") {
    Eigen::MatrixXd cand(2, 1);
    cand << 0.0, 1.5;  // the first has (numerically) zero spread
    const Eigen::VectorXd pick = sequential_augment(model, 1.0, cand);
    CHECK(pick(0) == 1.5);
  }
  SUBCASE("equal mean distance: larger spread wins") {
    // m(x) = exp(-x^2); choose rho halfway between m(1) and m(3)
    const double m1 = std::exp(-1.0), m2 = std::exp(-9.0);
    const double rho = 0.5 * (m1 + m2);
    Eigen::MatrixXd cand(2, 1);
    cand << 1.0, 3.0;  // s(3) > s(1), lower-s candidate listed first
    const Eigen::VectorXd pick = sequential_augment(model, rho, cand);
    CHECK(pick(0) == 3.0);
  }
  SUBCASE("all-degenerate candidates fail") {
    Eigen::MatrixXd cand(1, 1);
    cand << 0.0;
    CHECK_THROWS_AS(sequential_augment(model, 0.5, cand), DegenerateModel);
  }
}

TEST_CASE("design CSV round trip") {
  Design d = lhs(6, 3, 77);
  d.outputs = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const std::string path = "/tmp/rarebound_test_design.csv";
  save_design_csv(d, path);
  const Design back = load_design_csv(path);
  CHECK(back.n() == 6);
  CHECK(back.dim() == 3);
  REQUIRE(back.has_outputs());
  CHECK((back.points - d.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((*back.outputs - *d.outputs).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
