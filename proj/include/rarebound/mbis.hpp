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
#include <optional>

#include "rarebound/bounds.hpp"
#include "rarebound/kriging.hpp"

namespace rarebound {

struct RegionProbability {
  double p = 0.0;
  double se = 0.0;
  std::int64_t mc_samples = 0;
  bool zero_region = false;  // no member found in the MC sample
};

/// The critical region {x : m(x) < rho + kappa s(x)}, the importance-sampling
/// support. Zero-variance points are members iff m(x) < rho. Holds a pointer
/// to the model; the model must outlive the region.
struct CriticalRegion {
  const GpModel* model = nullptr;
  double rho = 0.0;
  double kappa = 0.0;
  std::optional<RegionProbability> prob;  // filled by region_probability

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Batch membership for a chunk of points.
  void membership(const Eigen::MatrixXd& points,
                  std::vector<unsigned char>& member) const;
};

CriticalRegion critical_region(const GpModel& model, double rho, double kappa);

/// P_X(region) by Monte Carlo (M >= 1e4); consumes no black-box budget.
RegionProbability region_probability(const CriticalRegion& region,
                                     const InputDistribution& dist,
                                     std::int64_t M, std::uint64_t seed,
                                     int threads = 1);

struct KappaTuneResult {
  double kappa = 0.0;
  CriticalRegion region;
  Eigen::MatrixXd retained;  // the m_target member points, an i.i.d. sample
                             // from P_X( . | region)
  RegionProbability prob;    // exactly m_target / M on the tuning sample
};

/// Chooses kappa so that exactly m_target of M input draws fall in the
/// region: kappa is the midpoint between the m_target-th and (m_target+1)-th
/// order statistics of t(x) = (m(x) - rho)/s(x). Throws TieFailure when the
/// midpoint is undefined and InfeasibleTarget when fewer than m_target draws
/// have finite t.
KappaTuneResult tune_kappa(const GpModel& model, double rho,
                           const InputDistribution& dist, std::int64_t M,
                           std::int64_t m_target, std::uint64_t seed,
                           int threads = 1);

/// Rejection sampling from P_X( . | region). Throws RejectionStall when the
/// draw cap is exceeded with no acceptance.
Eigen::MatrixXd sample_importance(const CriticalRegion& region,
                                  const InputDistribution& dist, std::int64_t m,
                                  std::uint64_t seed,
                                  std::int64_t draw_cap = 100000000);

struct IsEstimateResult {
  std::int64_t gamma = 0;
  double estimate = 0.0;
};

/// The importance-sampling estimate prob_region * Gamma / m, consuming
/// exactly m = Z.rows() black-box calls.
IsEstimateResult is_estimate(BudgetedObjective& obj, const Eigen::MatrixXd& Z,
                             double rho, double prob_region);

struct BiasBound {
  double c = 0.0;
  double se = 0.0;
  std::int64_t mc_samples = 0;
};

/// The computable bias bound c = E[ Phi((rho-m(X))/s(X)) (1 - 1_region(X)) ]
/// by Monte Carlo over M >= 1e5 draws. Every integrand term is <= Phi(-kappa).
BiasBound bias_bound_c(const GpModel& model, const CriticalRegion& region,
                       const InputDistribution& dist, std::int64_t M,
                       double rho, std::uint64_t seed, int threads = 1);

/// The stochastic upper bound b(Gamma, m, alpha) P_X(region) + c/beta,
/// clamped to [0,1], valid at level 1 - (alpha + beta).
BoundReport mbis_bound(std::int64_t gamma, std::int64_t m, double prob_region,
                       double c, double alpha, double beta);

struct Alpha0Result {
  double alpha0 = 0.0;
  double bound = 0.0;  // 2 * alpha0, the level-matched bound
};

/// Level matching with alpha = beta: the smallest alpha such that
/// b(Gamma, m, alpha) P + c/alpha <= 2 alpha (the left side is decreasing in
/// alpha). Bisection on [1e-12, 0.5]; throws NoCrossing when no solution
/// exists in the bracket.
Alpha0Result alpha0_search(std::int64_t gamma, std::int64_t m,
                           double prob_region, double c);

/// Full record of one MBIS run; every input needed to re-derive the bound.
struct MbisResult {
  std::int64_t gamma = 0;
  std::int64_t m = 0;
  double prob_region = 0.0;
  double c_kappa = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double kappa = 0.0;
  double bound = 1.0;
  double level = 0.0;
  std::int64_t budget_used = 0;
  nlohmann::json inputs = nlohmann::json::object();

  nlohmann::json to_json() const;
};

}  // namespace rarebound
