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

#include <nlohmann/json.hpp>

#include "rarebound/blackbox.hpp"

namespace rarebound {

inline constexpr int kReportSchemaVersion = 1;

/// A bound with its level and full provenance. `inputs` carries the free-form
/// provenance record (seeds, budgets, kappa, alpha, beta, MC sizes).
struct BoundReport {
  double bound = 1.0;
  double level = 0.0;          // 1-alpha or 1-(alpha+beta)
  std::string method;          // crude-mc | markov | chebyshev | bayes-credible | mbis
  std::int64_t successes = 0;  // Gamma (0 when not count-based)
  std::int64_t trials = 0;     // N or m (0 when not count-based)
  nlohmann::json inputs = nlohmann::json::object();

  nlohmann::json to_json() const;
  static BoundReport from_json(const nlohmann::json& j);
  /// "method,bound,level,successes,trials" (for table exports)
  std::string csv_row() const;
  static std::string csv_header();
};

/// Regularized incomplete beta function I_x(a, b). Continued-fraction
/// evaluation with the exponent carried in long double so that root
/// certificates hold for N up to 1e7.
double reg_inc_beta(double a, double b, double x);

/// P(Bin(N, p) <= T)
double binomial_cdf(std::int64_t T, std::int64_t N, double p);

/// Exact upper confidence bound: the b solving
///   sum_{k<=T} C(N,k) b^k (1-b)^(N-k) = alpha,
/// with b = 1 when T = N and the closed form 1 - alpha^(1/N) when T = 0.
double binomial_upper_bound(std::int64_t T, std::int64_t N, double alpha);

/// Smallest N such that the zero-count upper bound 1 - alpha^(1/N) is
/// <= target. Closed-form inversion verified by direct predicate evaluation.
std::int64_t min_calls_for_zero_count_bound(double alpha, double target);

/// Crude Monte Carlo upper bound: draws N inputs, counts f(X_i) < rho
/// (consuming exactly N budget), applies the exact binomial bound.
BoundReport crude_mc_bound(BudgetedObjective& obj, const InputDistribution& dist,
                           std::int64_t N, double rho, double alpha,
                           std::uint64_t seed);

/// min(pi_mean / alpha, 1), valid at level 1 - alpha.
double markov_bound(double pi_mean, double alpha);

/// min(pi_mean + sqrt(pi_var / alpha), 1), valid at level 1 - alpha.
double chebyshev_bound(double pi_mean, double pi_var, double alpha);

}  // namespace rarebound
