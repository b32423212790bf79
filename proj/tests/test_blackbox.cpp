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
#include <thread>

#include "rarebound/blackbox.hpp"

using namespace rarebound;

namespace {
Eigen::Vector2d pt(double a, double b) { return Eigen::Vector2d(a, b); }
}

TEST_CASE("toy function values") {
  CHECK(toy_f(0.0, -2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(toy_f(M_PI, M_PI - 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  // direct numeric evaluation of -sin(10)/10 - sin(12)/12 + 2
  const double direct = -std::sin(10.0) / 10.0 - std::sin(12.0) / 12.0 + 2.0;
  CHECK(toy_f(10.0, 10.0) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(std::abs(toy_f(10.0, 10.0) - 2.0991) < 1e-4);
}

TEST_CASE("toy removable singularity is smooth") {
  for (const double x2 : {-5.0, 0.7, 3.0}) {
    const double at0 = toy_f(0.0, x2);
    for (double t = -1e-4; t <= 1e-4; t += 1.3e-5)
      CHECK(std::abs(toy_f(t, x2) - at0) <= 1e-6);
  }
  // straddle the Taylor switch point
  CHECK(sinc(9.999e-7) == doctest::Approx(sinc(1.0001e-6)).epsilon(1e-12));
}

TEST_CASE("toy minimum over a large uniform sample") {
  CHECK(toy_f(0.0, -2.0) == 0.0);
  Rng rng(7);
  double lowest = 1e300;
  for (int i = 0; i < 1000000; ++i) {
    const double v = toy_f(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0));
    lowest = std::min(lowest, v);
  }
  CHECK(lowest >= 0.0);
  CHECK(lowest < 0.01);  // the failure region is reachable
}

TEST_CASE("budget accounting") {
  BudgetedObjective obj = make_toy_objective(3);
  CHECK(obj.budget_total() == 3);
  CHECK(obj.eval(pt(0.0, -2.0)) == doctest::Approx(0.0));
  CHECK(obj.budget_used() == 1);
  obj.eval(pt(1.0, 1.0));
  obj.eval(pt(2.0, 2.0));
  CHECK(obj.budget_used() == 3);
  CHECK(obj.budget_remaining() == 0);
  // budget errors win even for out-of-domain points
  CHECK_THROWS_AS(obj.eval(pt(99.0, 99.0)), BudgetExhausted);
  CHECK_THROWS_AS(obj.eval(pt(0.0, 0.0)), BudgetExhausted);
  CHECK(obj.budget_used() == 3);
}

TEST_CASE("domain violations do not consume budget") {
  BudgetedObjective obj = make_toy_objective(5);
  CHECK_THROWS_AS(obj.eval(pt(11.0, 0.0)), DomainViolation);
  CHECK(obj.budget_used() == 0);
}

TEST_CASE("evaluator failures consume the reserved slot") {
  int calls = 0;
  BudgetedObjective obj(
      [&calls](const Eigen::VectorXd& x) -> double {
        ++calls;
        if (x[0] > 0.5) throw std::runtime_error("boom");
        if (x[0] < -0.5) return std::nan("");
        return x[0];
      },
      Box::cube(-1.0, 1.0, 1), 10);
  Eigen::VectorXd x(1);
  x[0] = 0.9;
  CHECK_THROWS_AS(obj.eval(x), EvalFailure);
  x[0] = -0.9;
  CHECK_THROWS_AS(obj.eval(x), EvalFailure);
  CHECK(obj.budget_used() == 2);  // the expensive calls were made
  x[0] = 0.0;
  CHECK(obj.eval(x) == 0.0);
  CHECK(obj.budget_used() == 3);
}

TEST_CASE("budget contract under concurrent evaluation") {
  BudgetedObjective obj = make_toy_objective(100);
  std::atomic<int> successes{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w)
    workers.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        try {
          obj.eval(pt(0.1 * i, 0.2));
          ++successes;
        } catch (const BudgetExhausted&) {
        }
      }
    });
  for (auto& t : workers) t.join();
  CHECK(successes.load() == 100);
  CHECK(obj.budget_used() == 100);
}

TEST_CASE("input distributions sample inside the box") {
  const Box box = Box::cube(-2.0, 3.0, 4);
  Rng rng(11);
  SUBCASE("uniform") {
    const InputDistribution d = InputDistribution::uniform_on_box(box);
    const Eigen::MatrixXd X = d.sample_matrix(rng, 500);
    for (int i = 0; i < X.rows(); ++i) CHECK(box.contains(X.row(i)));
    CHECK(d.log_density(X.row(0)) == 0.0);
  }
  SUBCASE("independent marginals") {
    std::vector<InputDistribution::Marginal> m(4);
    m[1].kind = InputDistribution::Marginal::Kind::truncated_normal;
    m[1].mu = 0.0;
    m[1].sigma = 0.5;
    const InputDistribution d = InputDistribution::independent_marginals(box, m);
    const Eigen::MatrixXd X = d.sample_matrix(rng, 2000);
    for (int i = 0; i < X.rows(); ++i) CHECK(box.contains(X.row(i)));
    // the truncated normal concentrates near its mean
    double inside = 0;
    for (int i = 0; i < X.rows(); ++i) inside += std::abs(X(i, 1)) < 1.0;
    CHECK(inside / X.rows() > 0.9);
    CHECK(std::isinf(d.log_density(Eigen::Vector4d(0, 0, 0, 9))));
  }
}

TEST_CASE("external adapter: identity evaluator") {
  ExternalProcessConfig cfg;
  cfg.command = "while read a b; do echo \"$a\"; done";
  cfg.timeout_sec = 10.0;
  BudgetedObjective obj = make_external_objective(cfg, toy_box(), 10);
  CHECK(obj.eval(pt(3.5, -1.0)) == 3.5);
  CHECK(obj.eval(pt(-7.25, 2.0)) == -7.25);
  CHECK(obj.budget_used() == 2);
}

TEST_CASE("external adapter: process failure on nonzero exit") {
  ExternalProcessConfig cfg;
  cfg.command = "exit 3";
  cfg.timeout_sec = 5.0;
  BudgetedObjective obj = make_external_objective(cfg, toy_box(), 10);
  CHECK_THROWS_AS(obj.eval(pt(0.0, 0.0)), EvalFailure);
}

TEST_CASE("external adapter: malformed response") {
  ExternalProcessConfig cfg;
  cfg.command = "while read a b; do echo not-a-number; done";
  cfg.timeout_sec = 5.0;
  BudgetedObjective obj = make_external_objective(cfg, toy_box(), 10);
  CHECK_THROWS_AS(obj.eval(pt(0.0, 0.0)), ProcessFailure);
}

TEST_CASE("external adapter: timeout") {
  ExternalProcessConfig cfg;
  cfg.command = "sleep 30";
  cfg.timeout_sec = 0.2;
  BudgetedObjective obj = make_external_objective(cfg, toy_box(), 10);
  CHECK_THROWS_AS(obj.eval(pt(0.0, 0.0)), Timeout);
}

TEST_CASE("external toy process matches the in-process toy") {
  // the same arithmetic, evaluated through the line protocol
  ExternalProcessConfig cfg;
  cfg.command =
      "python3 -u -c \"\n"
      "import sys, math\n"
      "def sinc(t):\n"
      "    if abs(t) < 1e-6:\n"
      "        t2 = t*t\n"
      "        return 1.0 - t2/6.0*(1.0 - t2/20.0)\n"
      "    return math.sin(t)/t\n"
      "for line in sys.stdin:\n"
      "    x1, x2 = map(float, line.split())\n"
      "    print('%.17g' % (-sinc(x1) - sinc(x2+2.0) + 2.0))\n"
      "\"";
  cfg.timeout_sec = 20.0;
  BudgetedObjective obj = make_external_objective(cfg, toy_box(), 1000);
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double x1 = rng.uniform(-10.0, 10.0);
    const double x2 = rng.uniform(-10.0, 10.0);
    const double got = obj.eval(pt(x1, x2));
    CHECK(std::abs(got - toy_f(x1, x2)) <= 1e-12);
  }
  CHECK(obj.budget_used() == 1000);
}
