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

/// Monte Carlo summary of the random failure probability induced by the
/// posterior process.
struct PiPosteriorSummary {
  double mean = 0.0;
  double se_mean = 0.0;
  std::optional<double> variance;
  double se_variance = 0.0;
  std::int64_t mc_samples = 0;
  /// Estimate smaller than twice its standard error (variance path only).
  bool noise_dominated = false;
};

/// E(Pi) = E_X[ Phi((rho - m(X)) / s(X)) ], Monte Carlo over M input draws.
/// Zero-variance points contribute the indicator 1{m(x) < rho}. Consumes no
/// black-box budget.
PiPosteriorSummary posterior_pi_mean(const GpModel& model,
                                     const InputDistribution& dist,
                                     std::int64_t M, double rho,
                                     std::uint64_t seed, int threads = 1);

/// V(Pi) as the double integral of the indicator covariance
///   BVN(u, u'; r) - Phi(u) Phi(u')
/// over independent input pairs; Monte Carlo over M_pairs pairs.
PiPosteriorSummary posterior_pi_variance(const GpModel& model,
                                         const InputDistribution& dist,
                                         std::int64_t M_pairs, double rho,
                                         std::uint64_t seed, int threads = 1);

/// P(U <= u1, V <= u2) for a standard bivariate normal with correlation r.
/// Composite Gauss-Legendre quadrature of the conditional form
/// phi(t) Phi((u2 - r t)/sqrt(1-r^2)), with panel refinement around the
/// transition point; exact short-circuits at r = 0 and r = +-1.
double bvn_cdf(double u1, double u2, double r);

/// Upper empirical quantile by order statistic: the ceil(q*n)-th smallest
/// (clamped to [1, n]); q = 1 gives the maximum.
double empirical_quantile_upper(Eigen::VectorXd sample, double q);

struct CredibleBoundOptions {
  int max_dim = 10;          // conditional simulation refuses above this
  bool allow_high_dim = false;
  int threads = 1;
};

struct CredibleBoundResult {
  BoundReport report;
  Eigen::VectorXd pi_sample;  // the simulated realizations of Pi
};

/// Credible upper bound on Pi at level 1 - alpha: simulates n_realizations
/// conditional surfaces on the (repaired) grid, integrates each over M_int
/// input draws, and takes the empirical (1-alpha)-quantile. Consumes no
/// black-box budget.
CredibleBoundResult credible_bound(const GpModel& model,
                                   const InputDistribution& dist,
                                   const Design& grid, int n_realizations,
                                   std::int64_t M_int, double rho, double alpha,
                                   std::uint64_t seed,
                                   const CredibleBoundOptions& options = {});

void save_pi_sample_csv(const Eigen::VectorXd& pi_sample,
                        const std::string& path);

}  // namespace rarebound
