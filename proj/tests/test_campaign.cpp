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

#include "rarebound/campaign.hpp"

using namespace rarebound;

namespace {

CampaignConfig small_toy_config() {
  CampaignConfig cfg;
  cfg.objective = CampaignConfig::Objective::toy;
  cfg.budget = 100;
  cfg.n_design = 50;
  cfg.m_is = 50;
  cfg.rho = 0.01;
  cfg.mc.pi_mean = 100000;
  cfg.mc.region = 100000;
  cfg.mc.bias = 100000;
  cfg.mc.tune = 100000;
  cfg.mc.integration = 10000;
  cfg.mc.oracle = 1000000;
  cfg.mc.grid_points = 49;
  cfg.mc.realizations = 120;
  cfg.anneal_iterations = 1500;
  cfg.fit.multistarts = 5;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("oracle pi") {
  const InputDistribution dist = InputDistribution::uniform_on_box(toy_box());
  SUBCASE("the rare-event level at rho = 0.01") {
    const OracleEstimate est = oracle_pi(dist, 0.01, 10000000, 31);
    CHECK(std::abs(est.p - 4.72e-4) <= 3.0 * est.se);
  }
  SUBCASE("empty and full events") {
    CHECK(oracle_pi(dist, -1.0, 1000000, 5).p == 0.0);
    CHECK(oracle_pi(dist, 10.0, 1000000, 5).p == 1.0);
  }
  SUBCASE("precondition") {
    CHECK_THROWS_AS(oracle_pi(dist, 0.01, 1000, 5), PreconditionError);
  }
}

TEST_CASE("synthetic26 shape") {
  const Synthetic26Params p;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(26, 0.5);
  const double center = synthetic26_f(x, p);
  CHECK(center >= p.offset - p.sin_amp);
  CHECK(center <= p.offset + p.sin_amp);
  // strictly positive on the whole box with the default parameters
  Rng rng(2);
  double lowest = 1e300;
  for (int i = 0; i < 20000; ++i) {
    for (int j = 0; j < 26; ++j) x[j] = rng.uniform();
    lowest = std::min(lowest, synthetic26_f(x, p));
  }
  CHECK(lowest > 0.0);
}

TEST_CASE("stage-2 verdict thresholds") {
  using V = Classification::Verdict;
  CHECK(stage2_verdict(1.2e-5, 1e-5, 1e-2) == V::relatively_safe);
  CHECK(stage2_verdict(1.0e-5, 1e-5, 1e-2) == V::totally_safe);
  CHECK(stage2_verdict(9.9e-6, 1e-5, 1e-2) == V::totally_safe);
  CHECK(stage2_verdict(1e-2, 1e-5, 1e-2) == V::unsafe);
  CHECK(stage2_verdict(0.5, 1e-5, 1e-2) == V::unsafe);
  CHECK(stage2_verdict(1e-3, 1e-5, 1e-2) == V::relatively_safe);

  // lowering both markers never moves a verdict toward totally-safe
  const auto rank = [](V v) {
    return v == V::totally_safe ? 0 : v == V::relatively_safe ? 1 : 2;
  };
  Rng rng(64);
  for (int i = 0; i < 2000; ++i) {
    const double bound = std::pow(10.0, rng.uniform(-8.0, 0.0));
    double safe = std::pow(10.0, rng.uniform(-7.0, -3.0));
    double unsafe = safe * std::pow(10.0, rng.uniform(0.5, 4.0));
    const int before = rank(stage2_verdict(bound, safe, unsafe));
    const double shrink = rng.uniform(0.05, 1.0);
    const int after = rank(stage2_verdict(bound, safe * shrink,
                                          std::max(unsafe * shrink, safe)));
    CHECK(after >= before);
  }
}

TEST_CASE("classification of constant objectives at stage 1") {
  CampaignConfig cfg = small_toy_config();
  cfg.rho = 0.5;
  SUBCASE("never failing: totally safe after n calls") {
    BudgetedObjective obj(
        [](const Eigen::VectorXd&) { return 1.5; }, toy_box(), 100);
    const Classification cls = classify_point(obj, cfg, 3);
    CHECK(cls.verdict == Classification::Verdict::totally_safe);
    CHECK(cls.stage == 1);
    CHECK(cls.budget_used == cfg.n_design);
    CHECK(cls.pi_mean_stage1 <= cfg.stage1_null_threshold);
    REQUIRE(!cls.reports.empty());
    CHECK(cls.reports.front().method == "markov");
  }
  SUBCASE("always failing: unsafe after n calls") {
    BudgetedObjective obj(
        [](const Eigen::VectorXd&) { return -0.5; }, toy_box(), 100);
    const Classification cls = classify_point(obj, cfg, 3);
    CHECK(cls.verdict == Classification::Verdict::unsafe);
    CHECK(cls.stage == 1);
    CHECK(cls.budget_used == cfg.n_design);
    CHECK(cls.pi_mean_stage1 >= cfg.marker_unsafe);
  }
}

TEST_CASE("classification of the synthetic 26-d point reaches stage 2") {
  CampaignConfig cfg;
  cfg.objective = CampaignConfig::Objective::synthetic26;
  cfg.budget = 200;
  cfg.n_design = 150;
  cfg.m_is = 50;
  cfg.rho = 0.0;
  cfg.mc.pi_mean = 200000;
  cfg.mc.tune = 200000;
  cfg.mc.bias = 100000;
  cfg.anneal_iterations = 2000;
  cfg.fit.multistarts = 5;
  cfg.threads = 2;

  BudgetedObjective obj = cfg.make_objective();
  const Classification cls = classify_point(obj, cfg, 42);
  CHECK(cls.stage == 2);
  CHECK(cls.budget_used == cfg.n_design + cfg.m_is);
  CHECK_FALSE(cls.no_crossing);
  // the function never falls below rho, so the importance run sees no failure
  const BoundReport& mbis = cls.reports.back();
  CHECK(mbis.method == "mbis");
  CHECK(mbis.successes == 0);
  CHECK(mbis.bound > 0.0);
  CHECK(mbis.bound < 1e-2);
  CHECK(cls.verdict == stage2_verdict(mbis.bound, cfg.marker_safe,
                                      cfg.marker_unsafe));
  // verdict reproducibility
  BudgetedObjective obj2 = cfg.make_objective();
  const Classification again = classify_point(obj2, cfg, 42);
  CHECK(again.verdict == cls.verdict);
  CHECK(again.reports.back().bound == mbis.bound);
}

TEST_CASE("budget exhaustion surfaces as the budget error") {
  CampaignConfig cfg = small_toy_config();
  BudgetedObjective obj = make_toy_objective(10);  // less than n_design
  CHECK_THROWS_AS(classify_point(obj, cfg, 1), BudgetExhausted);
}

TEST_CASE("toy study: small repetition run") {
  CampaignConfig cfg = small_toy_config();
  const StudyResult res = run_toy_study(cfg, 3, 2026);
  CHECK(res.repetitions == 3);
  CHECK(res.bayes.failures == 0);
  CHECK(res.mbis.failures == 0);
  CHECK(res.bayes.bounds.size() == 3);
  CHECK(res.mbis.bounds.size() == 3);
  for (const double b : res.bayes.bounds) {
    CHECK(b > 0.0);
    CHECK(b < 0.05);
  }
  for (const double b : res.mbis.bounds) {
    CHECK(b > 0.0);
    CHECK(b < 0.05);
  }
  CHECK(res.mbis.min <= res.mbis.median);
  CHECK(res.mbis.median <= res.mbis.max);

  SUBCASE("bit-for-bit reproducibility of the whole table") {
    const StudyResult again = run_toy_study(cfg, 3, 2026);
    for (std::size_t i = 0; i < res.bayes.bounds.size(); ++i)
      CHECK(again.bayes.bounds[i] == res.bayes.bounds[i]);
    for (std::size_t i = 0; i < res.mbis.bounds.size(); ++i)
      CHECK(again.mbis.bounds[i] == res.mbis.bounds[i]);
    CHECK(again.oracle.p == res.oracle.p);
  }
  SUBCASE("single repetition collapses the summary") {
    const StudyResult one = run_toy_study(cfg, 1, 7);
    CHECK(one.mbis.bounds.size() == 1);
    CHECK(one.mbis.min == one.mbis.max);
    CHECK(one.mbis.q1 == one.mbis.median);
    CHECK(one.mbis.mean == one.mbis.min);
  }
  SUBCASE("serialized outputs carry the table layout") {
    const nlohmann::json j = res.to_json();
    CHECK(j.at("schema_version").get<int>() == kReportSchemaVersion);
    CHECK(j.at("mbis_98").contains("median_x1e4"));
    CHECK(j.at("bayes_credible_98").contains("covered"));
    const std::string csv = res.csv();
    CHECK(csv.find("rep,method,design,bound") == 0);
    CHECK(csv.find("mbis") != std::string::npos);
  }
}

TEST_CASE("sequential-proxy design method runs end to end") {
  CampaignConfig cfg = small_toy_config();
  cfg.design_method = CampaignConfig::DesignMethod::sequential_proxy;
  cfg.n_design = 20;
  cfg.m_is = 20;
  cfg.budget = 40;
  cfg.candidate_pool = 120;
  BudgetedObjective obj = cfg.make_objective(20);
  const auto [design, model] = build_design(cfg, obj, 20, 5);
  CHECK(design.n() == 20);
  CHECK(obj.budget_used() == 20);
  CHECK(model.n() == 20);
  // a fresh run of the study under this method labels its column correctly
  const StudyResult res = run_toy_study(cfg, 1, 3);
  CHECK(res.design_label == "misclassification-proxy");
}

TEST_CASE("campaign config serialization round trip") {
  CampaignConfig cfg = small_toy_config();
  cfg.objective = CampaignConfig::Objective::synthetic26;
  cfg.design_method = CampaignConfig::DesignMethod::sequential_proxy;
  cfg.synth.offset = 0.07;
  cfg.seed = 99;
  const nlohmann::json j = cfg.to_json();
  const CampaignConfig back = CampaignConfig::from_json(j);
  CHECK(back.objective == cfg.objective);
  CHECK(back.design_method == cfg.design_method);
  CHECK(back.synth.offset == 0.07);
  CHECK(back.mc.realizations == cfg.mc.realizations);
  CHECK(back.seed == 99);
  CHECK_THROWS_AS(
      CampaignConfig::from_json({{"objective", "nonsense"}}),
      PreconditionError);
  CHECK_THROWS_AS(
      CampaignConfig::from_json({{"budget", 10}, {"n", 50}, {"m", 50}}),
      PreconditionError);
}
