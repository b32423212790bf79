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

#include "rarebound/mbis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "parallel.hpp"
#include "rarebound/normal.hpp"
#include "rarebound/rng.hpp"
#include "rarebound/simd.hpp"

namespace rarebound {

namespace {

constexpr std::int64_t kChunk = 8192;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// t(x) = (m(x) - rho)/s(x); membership is t < kappa. Zero-variance points
/// carry t = -inf when m < rho (member for every kappa) and +inf otherwise.
void t_statistic(const GpModel& model, double rho, const Eigen::MatrixXd& X,
                 Eigen::VectorXd& t) {
  Eigen::VectorXd mean, var;
  model.posterior_mean_var(X, mean, var);
  t.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double s = std::sqrt(std::max(var[i], 0.0));
    if (s > 0.0)
      t[i] = (mean[i] - rho) / s;
    else
      t[i] = mean[i] < rho ? -kInf : kInf;
  }
}

}  // namespace

bool CriticalRegion::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double m = model->posterior_mean(x);
  const double v = model->posterior_var(x);
  const double s = std::sqrt(std::max(v, 0.0));
  if (s > 0.0) return (m - rho) / s < kappa;
  return m < rho;
}

void CriticalRegion::membership(const Eigen::MatrixXd& points,
                                std::vector<unsigned char>& member) const {
  Eigen::VectorXd t;
  t_statistic(*model, rho, points, t);
  member.resize(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    member[i] = t[i] < kappa ? 1 : 0;
}

CriticalRegion critical_region(const GpModel& model, double rho, double kappa) {
  CriticalRegion r;
  r.model = &model;
  r.rho = rho;
  r.kappa = kappa;
  return r;
}

RegionProbability region_probability(const CriticalRegion& region,
                                     const InputDistribution& dist,
                                     std::int64_t M, std::uint64_t seed,
                                     int threads) {
  if (M < 10000) throw PreconditionError("region_probability needs M >= 1e4");
  const std::int64_t chunks = (M + kChunk - 1) / kChunk;
  std::vector<std::int64_t> counts(chunks, 0);
  parallel_for(chunks, threads, [&](std::int64_t c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M - c * kChunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    Eigen::VectorXd t;
    t_statistic(*region.model, region.rho, X, t);
    counts[c] = static_cast<std::int64_t>(
        simd::count_less(t.data(), static_cast<std::size_t>(k), region.kappa));
  });
  std::int64_t total = 0;
  for (const auto c : counts) total += c;
  RegionProbability out;
  out.mc_samples = M;
  out.p = static_cast<double>(total) / static_cast<double>(M);
  out.se = std::sqrt(out.p * (1.0 - out.p) / static_cast<double>(M));
  out.zero_region = total == 0;
  return out;
}

KappaTuneResult tune_kappa(const GpModel& model, double rho,
                           const InputDistribution& dist, std::int64_t M,
                           std::int64_t m_target, std::uint64_t seed,
                           int threads) {
  if (m_target < 1 || M < m_target)
    throw PreconditionError("tune_kappa needs M >= m_target >= 1");

  // pass 1: t statistics for the whole sample (chunk-seeded, reproducible)
  const std::int64_t chunks = (M + kChunk - 1) / kChunk;
  Eigen::VectorXd t(M);
  parallel_for(chunks, threads, [&](std::int64_t c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M - c * kChunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    Eigen::VectorXd tc;
    t_statistic(model, rho, X, tc);
    t.segment(c * kChunk, k) = tc;
  });

  std::int64_t finite = 0;
  for (Eigen::Index i = 0; i < M; ++i)
    if (std::isfinite(t[i])) ++finite;
  if (finite < m_target)
    throw InfeasibleTarget("only " + std::to_string(finite) +
                           " draws have finite t; need " +
                           std::to_string(m_target));

  double kappa;
  if (m_target == M) {
    double tmax = -kInf;
    for (Eigen::Index i = 0; i < M; ++i)
      if (std::isfinite(t[i])) tmax = std::max(tmax, t[i]);
    kappa = std::nextafter(tmax, kInf);  // just above the maximum finite t
  } else {
    std::vector<double> ts(t.data(), t.data() + M);
    std::nth_element(ts.begin(), ts.begin() + (m_target - 1), ts.end());
    const double a = ts[m_target - 1];
    const double b = *std::min_element(ts.begin() + m_target, ts.end());
    if (a == b)
      throw TieFailure("order statistics coincide; midpoint undefined");
    if (a == -kInf) {
      // exactly m_target always-member points; any kappa below b works
      kappa = b - 0.5 * (1.0 + std::abs(b));
    } else if (b == kInf) {
      kappa = std::nextafter(a, kInf);
    } else {
      kappa = 0.5 * (a + b);
      if (!(kappa > a && kappa < b))
        throw TieFailure("adjacent order statistics; midpoint collapses");
    }
  }

  // pass 2: regenerate the same sample and retain the members, in draw order
  KappaTuneResult out;
  out.kappa = kappa;
  out.region = critical_region(model, rho, kappa);
  out.retained.resize(m_target, model.dim());
  std::int64_t filled = 0;
  for (std::int64_t c = 0; c < chunks && filled < m_target; ++c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M - c * kChunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    for (Eigen::Index i = 0; i < k && filled < m_target; ++i)
      if (t[c * kChunk + i] < kappa) out.retained.row(filled++) = X.row(i);
  }
  std::int64_t members = 0;
  for (Eigen::Index i = 0; i < M; ++i)
    if (t[i] < kappa) ++members;
  if (members != m_target || filled != m_target)
    throw TieFailure("membership recount mismatch: " + std::to_string(members) +
                     " vs target " + std::to_string(m_target));

  out.prob.p = static_cast<double>(m_target) / static_cast<double>(M);
  out.prob.se = std::sqrt(out.prob.p * (1.0 - out.prob.p) /
                          static_cast<double>(M));
  out.prob.mc_samples = M;
  out.region.prob = out.prob;
  return out;
}

Eigen::MatrixXd sample_importance(const CriticalRegion& region,
                                  const InputDistribution& dist, std::int64_t m,
                                  std::uint64_t seed, std::int64_t draw_cap) {
  if (m < 0) throw PreconditionError("m must be >= 0");
  if (region.prob && !(region.prob->p > 0.0))
    throw PreconditionError("region has zero probability estimate");
  Eigen::MatrixXd out(m, dist.dim());
  if (m == 0) return out;

  std::int64_t accepted = 0;
  std::int64_t drawn = 0;
  std::uint64_t chunk_index = 0;
  std::vector<unsigned char> member;
  while (accepted < m) {
    Rng rng(derive_seed(seed, chunk_index++));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, kChunk);
    region.membership(X, member);
    for (Eigen::Index i = 0; i < X.rows() && accepted < m; ++i)
      if (member[i]) out.row(accepted++) = X.row(i);
    drawn += kChunk;
    if (drawn >= draw_cap && accepted == 0)
      throw RejectionStall("no acceptance after " + std::to_string(drawn) +
                           " draws");
    if (drawn >= 100 * draw_cap)
      throw RejectionStall("acceptance rate too low: " +
                           std::to_string(accepted) + "/" +
                           std::to_string(drawn));
  }
  return out;
}

IsEstimateResult is_estimate(BudgetedObjective& obj, const Eigen::MatrixXd& Z,
                             double rho, double prob_region) {
  const auto m = Z.rows();
  if (obj.budget_remaining() < static_cast<std::uint64_t>(m))
    throw BudgetExhausted("is_estimate needs " + std::to_string(m) +
                          " remaining calls");
  IsEstimateResult out;
  for (Eigen::Index i = 0; i < m; ++i)
    if (obj.eval(Z.row(i)) < rho) ++out.gamma;
  out.estimate =
      m > 0 ? prob_region * static_cast<double>(out.gamma) / static_cast<double>(m)
            : 0.0;
  return out;
}

BiasBound bias_bound_c(const GpModel& model, const CriticalRegion& region,
                       const InputDistribution& dist, std::int64_t M,
                       double rho, std::uint64_t seed, int threads) {
  if (M < 100000) throw PreconditionError("bias_bound_c needs M >= 1e5");
  const std::int64_t chunks = (M + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0), sumsqs(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::int64_t c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M - c * kChunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    Eigen::VectorXd t;
    t_statistic(model, rho, X, t);
    // u = -t for the finite entries; members contribute 0
    Eigen::VectorXd u(k), phi(k);
    for (Eigen::Index i = 0; i < k; ++i)
      u[i] = std::isfinite(t[i]) ? -t[i] : 0.0;
    simd::norm_cdf_array(u.data(), phi.data(), static_cast<std::size_t>(k));
    double sum = 0.0, sumsq = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const bool member = t[i] < region.kappa;
      if (member) continue;
      const double val = std::isfinite(t[i]) ? phi[i] : 0.0;
      // t = +inf means s = 0 and m >= rho: the indicator limit is 0
      sum += val;
      sumsq += val * val;
    }
    sums[c] = sum;
    sumsqs[c] = sumsq;
  });

  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sumsq += sumsqs[c];
  }
  BiasBound out;
  out.mc_samples = M;
  out.c = sum / static_cast<double>(M);
  const double var =
      std::max(0.0, (sumsq - sum * sum / M) / static_cast<double>(M - 1));
  out.se = std::sqrt(var / static_cast<double>(M));
  return out;
}

BoundReport mbis_bound(std::int64_t gamma, std::int64_t m, double prob_region,
                       double c, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 &&
        alpha + beta < 1.0))
    throw PreconditionError("need alpha, beta in (0,1) with alpha + beta < 1");
  if (!(prob_region >= 0.0 && prob_region <= 1.0))
    throw PreconditionError("prob_region must be in [0,1]");
  if (!(c >= 0.0)) throw PreconditionError("c must be >= 0");
  BoundReport rep;
  rep.method = "mbis";
  rep.bound = std::min(
      binomial_upper_bound(gamma, m, alpha) * prob_region + c / beta, 1.0);
  rep.level = 1.0 - (alpha + beta);
  rep.successes = gamma;
  rep.trials = m;
  rep.inputs = {{"prob_region", prob_region},
                {"c", c},
                {"alpha", alpha},
                {"beta", beta}};
  return rep;
}

Alpha0Result alpha0_search(std::int64_t gamma, std::int64_t m,
                           double prob_region, double c) {
  if (!(prob_region >= 0.0 && prob_region <= 1.0))
    throw PreconditionError("prob_region must be in [0,1]");
  if (!(c >= 0.0)) throw PreconditionError("c must be >= 0");
  const auto h = [&](double a) {
    return binomial_upper_bound(gamma, m, a) * prob_region + c / a - 2.0 * a;
  };
  double lo = 1e-12, hi = 0.5;
  if (h(hi) > 0.0)
    throw NoCrossing("bound exceeds 2*alpha on the whole bracket");
  if (h(lo) <= 0.0) {
    Alpha0Result out;
    out.alpha0 = lo;
    out.bound = 2.0 * lo;
    return out;
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  Alpha0Result out;
  out.alpha0 = hi;  // certificate: h(hi) <= 0 held throughout
  out.bound = 2.0 * hi;
  return out;
}

nlohmann::json MbisResult::to_json() const {
  return {{"schema_version", kReportSchemaVersion},
          {"method", "mbis"},
          {"gamma", gamma},
          {"m", m},
          {"prob_region", prob_region},
          {"c_kappa", c_kappa},
          {"alpha", alpha},
          {"beta", beta},
          {"kappa", kappa},
          {"bound", bound},
          {"level", level},
          {"budget_used", budget_used},
          {"inputs", inputs}};
}

}  // namespace rarebound
