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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rarebound/bayes.hpp"
#include "rarebound/mbis.hpp"

namespace rarebound {

/// Hardware thread count, overridable via the RAREBOUND_THREADS variable.
int default_threads();

/// Smooth 26-dimensional stand-in objective on [0,1]^26 with a tunable
/// failure level: a shifted weighted quadratic plus a sinusoidal ripple.
/// Synthetic data, not derived from any physical simulator.
struct Synthetic26Params {
  double offset = 0.1;
  double quad_amp = 1.0;
  double sin_amp = 0.05;
  double sin_freq = 2.0;
};

double synthetic26_f(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Synthetic26Params& params);
Box synthetic26_box();
BudgetedObjective make_synthetic26_objective(const Synthetic26Params& params,
                                             std::uint64_t budget);

struct McSizes {
  std::int64_t pi_mean = 1000000;      // stage-1 E(Pi) integration
  std::int64_t region = 10000000;      // P_X(region) for fixed-kappa runs
  std::int64_t bias = 10000000;        // c(kappa) integration
  std::int64_t tune = 1000000;         // kappa tuning sample
  std::int64_t integration = 100000;   // M_int per Pi realization
  std::int64_t oracle = 10000000;      // toy oracle sample
  int grid_points = 100;               // T
  int realizations = 1000;             // conditional simulations
};

struct CampaignConfig {
  enum class Objective { toy, external, synthetic26 };
  enum class DesignMethod { lhs_maximin, sequential_proxy };

  Objective objective = Objective::toy;
  std::string external_command;
  double external_timeout_sec = 30.0;
  Synthetic26Params synth;

  std::int64_t budget = 100;
  int n_design = 50;  // stage-1 / metamodel design size
  int m_is = 50;      // importance-sampling calls
  double rho = 0.01;
  double alpha = 0.01;        // MBIS binomial side
  double beta = 0.01;         // MBIS bias side
  double bayes_alpha = 0.02;  // credible bound level
  double kappa = 3.0;         // fixed-kappa runs (toy study)

  double marker_safe = 1e-5;
  double marker_unsafe = 1e-2;
  double stage1_null_threshold = 0.5e-10;

  DesignMethod design_method = DesignMethod::lhs_maximin;
  int anneal_iterations = 10000;
  int refit_every = 1;        // sequential design refit cadence
  int candidate_pool = 500;   // candidates per sequential step

  McSizes mc;
  FitConfig fit;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out_dir;

  static CampaignConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Box domain() const;
  InputDistribution input_distribution() const;
  BudgetedObjective make_objective() const;  // fresh objective with `budget`
  BudgetedObjective make_objective(std::uint64_t budget_override) const;
};

/// Space-filling design scaled into the box (LHS improved by maximin
/// annealing, or the sequential misclassification-proxy augmentation),
/// evaluated through the budget and fitted.
std::pair<Design, GpModel> build_design(const CampaignConfig& config,
                                        BudgetedObjective& obj, int n_points,
                                        std::uint64_t seed);

struct Classification {
  enum class Verdict { totally_safe, relatively_safe, unsafe };
  Verdict verdict = Verdict::relatively_safe;
  int stage = 1;
  double pi_mean_stage1 = 0.0;
  double pi_mean_se = 0.0;
  bool no_crossing = false;  // alpha0 search failed; downgraded verdict
  std::int64_t budget_used = 0;
  std::vector<BoundReport> reports;
  nlohmann::json to_json() const;
};

const char* verdict_name(Classification::Verdict verdict);

/// Stage-2 verdict from the level-matched bound and the two markers.
Classification::Verdict stage2_verdict(double bound, double marker_safe,
                                       double marker_unsafe);

/// The two-step certification strategy: stage 1 fits on n points and decides
/// on E(Pi) (totally safe below the null threshold, unsafe at or above the
/// upper marker); otherwise stage 2 tunes kappa, spends m calls on the
/// importance sample and matches levels with the alpha0 search.
Classification classify_point(BudgetedObjective& obj,
                              const CampaignConfig& config, std::uint64_t seed);

struct OracleEstimate {
  double p = 0.0;
  double se = 0.0;
  std::int64_t mc_samples = 0;
};

/// Massive Monte Carlo estimate of P(toy_f(X) < rho) using the true function
/// directly (budget-exempt; labeled ORACLE in reports).
OracleEstimate oracle_pi(const InputDistribution& dist, double rho,
                         std::int64_t M, std::uint64_t seed);

struct StudyMethodStats {
  std::vector<double> bounds;  // successful repetitions, by repetition index
  int failures = 0;
  int covered = 0;  // bound >= oracle pi
  double min = 0.0, q1 = 0.0, mean = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct StudyResult {
  StudyMethodStats bayes;
  StudyMethodStats mbis;
  OracleEstimate oracle;
  int repetitions = 0;
  std::string design_label;

  nlohmann::json to_json() const;  // summary table, entries multiplied by 1e4
  std::string csv() const;         // one row per repetition and method
};

/// Repetition study on the toy problem: each repetition draws a fresh design,
/// fits, and runs both bounding strategies (Bayesian credible bound on N
/// points; MBIS with n + m split). Emits min/Q1/mean/median/Q3/max and the
/// coverage frequency against the oracle.
StudyResult run_toy_study(const CampaignConfig& config, int repetitions,
                          std::uint64_t seed);

}  // namespace rarebound
