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

#include "rarebound/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <vector>

#include "parallel.hpp"
#include "rarebound/normal.hpp"
#include "rarebound/rng.hpp"
#include "rarebound/simd.hpp"

namespace rarebound {

namespace {

constexpr std::int64_t kChunk = 8192;

struct GaussLegendre {
  std::vector<double> node, weight;  // on [-1, 1]
};

/// Nodes by Newton iteration on the Legendre polynomial (machine accurate).
const GaussLegendre& gl24() {
  static const GaussLegendre rule = [] {
    constexpr int n = 24;
    GaussLegendre r;
    r.node.resize(n);
    r.weight.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (x * p0 - p1) / (x * x - 1.0);
        const double dx = p0 / pp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      r.node[i] = -x;
      r.node[n - 1 - i] = x;
      r.weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
      r.weight[n - 1 - i] = r.weight[i];
    }
    return r;
  }();
  return rule;
}

double panel_integral(double a, double b, double v, double r, double s) {
  const auto& gl = gl24();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.node.size(); ++i) {
    const double t = mid + half * gl.node[i];
    acc += gl.weight[i] * norm_pdf(t) * norm_cdf((v - r * t) / s);
  }
  return acc * half;
}

struct Accum {
  double sum = 0.0;
  double sumsq = 0.0;
};

PiPosteriorSummary reduce_summary(const std::vector<Accum>& parts,
                                  std::int64_t M) {
  double sum = 0.0, sumsq = 0.0;
  for (const auto& p : parts) {
    sum += p.sum;
    sumsq += p.sumsq;
  }
  PiPosteriorSummary out;
  out.mc_samples = M;
  out.mean = sum / static_cast<double>(M);
  const double var =
      M > 1 ? std::max(0.0, (sumsq - sum * sum / M) / static_cast<double>(M - 1))
            : 0.0;
  out.se_mean = std::sqrt(var / static_cast<double>(M));
  return out;
}

}  // namespace

PiPosteriorSummary posterior_pi_mean(const GpModel& model,
                                     const InputDistribution& dist,
                                     std::int64_t M, double rho,
                                     std::uint64_t seed, int threads) {
  if (M < 1) throw PreconditionError("posterior_pi_mean needs M >= 1");
  const std::int64_t chunks = (M + kChunk - 1) / kChunk;
  std::vector<Accum> parts(chunks);

  parallel_for(chunks, threads, [&](std::int64_t c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M - c * kChunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    Eigen::VectorXd mean, var;
    model.posterior_mean_var(X, mean, var);
    Eigen::VectorXd u(k), phi(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double s = std::sqrt(std::max(var[i], 0.0));
      u[i] = s > 0.0 ? (rho - mean[i]) / s : 0.0;
    }
    simd::norm_cdf_array(u.data(), phi.data(), static_cast<std::size_t>(k));
    Accum acc;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double s = std::sqrt(std::max(var[i], 0.0));
      const double val = s > 0.0 ? phi[i] : (mean[i] < rho ? 1.0 : 0.0);
      acc.sum += val;
      acc.sumsq += val * val;
    }
    parts[c] = acc;
  });

  PiPosteriorSummary out = reduce_summary(parts, M);
  out.mean = std::min(std::max(out.mean, 0.0), 1.0);
  return out;
}

PiPosteriorSummary posterior_pi_variance(const GpModel& model,
                                         const InputDistribution& dist,
                                         std::int64_t M_pairs, double rho,
                                         std::uint64_t seed, int threads) {
  if (M_pairs < 1) throw PreconditionError("posterior_pi_variance needs M >= 1");
  const std::int64_t chunks = (M_pairs + kChunk - 1) / kChunk;
  std::vector<Accum> parts(chunks);

  parallel_for(chunks, threads, [&](std::int64_t c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M_pairs - c * kChunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd A = dist.sample_matrix(rng, k);
    const Eigen::MatrixXd B = dist.sample_matrix(rng, k);
    Eigen::VectorXd ma, va, mb, vb, cov;
    model.posterior_mean_var(A, ma, va);
    model.posterior_mean_var(B, mb, vb);
    model.posterior_pair_cov(A, B, cov);
    Accum acc;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double sa = std::sqrt(std::max(va[i], 0.0));
      const double sb = std::sqrt(std::max(vb[i], 0.0));
      double val = 0.0;
      if (sa > 0.0 && sb > 0.0) {
        const double ua = (rho - ma[i]) / sa;
        const double ub = (rho - mb[i]) / sb;
        double r = cov[i] / (sa * sb);
        r = std::min(std::max(r, -1.0), 1.0);
        val = bvn_cdf(ua, ub, r) - norm_cdf(ua) * norm_cdf(ub);
      }
      acc.sum += val;
      acc.sumsq += val * val;
    }
    parts[c] = acc;
  });

  PiPosteriorSummary out = reduce_summary(parts, M_pairs);
  out.variance = std::max(0.0, out.mean);
  out.se_variance = out.se_mean;
  out.noise_dominated = std::abs(out.mean) < 2.0 * out.se_mean;
  out.mean = 0.0;
  out.se_mean = 0.0;
  return out;
}

double bvn_cdf(double u1, double u2, double r) {
  r = std::min(std::max(r, -1.0), 1.0);
  if (r == 0.0) return norm_cdf(u1) * norm_cdf(u2);
  if (r >= 1.0 - 1e-14) return norm_cdf(std::min(u1, u2));
  if (r <= -1.0 + 1e-14)
    return std::max(0.0, norm_cdf(u1) + norm_cdf(u2) - 1.0);
  if (u1 >= 9.0) return norm_cdf(u2);
  if (u2 >= 9.0) return norm_cdf(u1);
  if (u1 <= -9.0 || u2 <= -9.0) return 0.0;

  const double s = std::sqrt((1.0 - r) * (1.0 + r));
  const double lo = -9.0, hi = u1;
  // Panel edges cluster around the transition point of the conditional CDF.
  std::vector<double> edges{lo, hi};
  const double tc = u2 / r;
  const double w = s / std::abs(r);
  for (const double mult : {0.0, 1.0, 3.0, 9.0, 27.0}) {
    for (const double sign : {-1.0, 1.0}) {
      const double e = tc + sign * mult * w;
      if (e > lo && e < hi) edges.push_back(e);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 3.0)));
    for (int p = 0; p < pieces; ++p) {
      const double pa = a + (b - a) * p / pieces;
      const double pb = a + (b - a) * (p + 1) / pieces;
      acc += panel_integral(pa, pb, u2, r, s);
    }
  }
  return std::min(std::max(acc, 0.0), 1.0);
}

double empirical_quantile_upper(Eigen::VectorXd sample, double q) {
  const auto n = sample.size();
  if (n < 1) throw PreconditionError("empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw PreconditionError("q must be in [0,1]");
  auto idx = static_cast<Eigen::Index>(std::ceil(q * static_cast<double>(n)));
  idx = std::min(std::max<Eigen::Index>(idx, 1), n);
  std::nth_element(sample.data(), sample.data() + (idx - 1),
                   sample.data() + n);
  return sample[idx - 1];
}

CredibleBoundResult credible_bound(const GpModel& model,
                                   const InputDistribution& dist,
                                   const Design& grid, int n_realizations,
                                   std::int64_t M_int, double rho, double alpha,
                                   std::uint64_t seed,
                                   const CredibleBoundOptions& options) {
  if (n_realizations < 100)
    throw PreconditionError("credible_bound needs at least 100 realizations");
  if (M_int < 10000)
    throw PreconditionError("credible_bound needs M_int >= 1e4");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw PreconditionError("alpha must be in (0,1)");
  if (model.dim() > options.max_dim && !options.allow_high_dim)
    throw PreconditionError(
        "conditional simulation on a grid is impractical above dimension " +
        std::to_string(options.max_dim) + " (override to force)");

  const ConditionalSimulation sim =
      conditional_simulate(model, grid, n_realizations, derive_seed(seed, 1));

  const std::int64_t chunks = (M_int + kChunk - 1) / kChunk;
  std::vector<std::vector<std::int64_t>> counts(
      chunks, std::vector<std::int64_t>(n_realizations, 0));
  parallel_for(chunks, options.threads, [&](std::int64_t c) {
    const std::int64_t k = std::min<std::int64_t>(kChunk, M_int - c * kChunk);
    Rng rng(derive_seed(derive_seed(seed, 2), static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    Eigen::MatrixXd vals;
    sim.evaluate_all(X, vals);  // k x R, column-major
    for (int rz = 0; rz < n_realizations; ++rz)
      counts[c][rz] += static_cast<std::int64_t>(simd::count_less(
          vals.col(rz).data(), static_cast<std::size_t>(k), rho));
  });

  Eigen::VectorXd pi(n_realizations);
  for (int rz = 0; rz < n_realizations; ++rz) {
    std::int64_t total = 0;
    for (std::int64_t c = 0; c < chunks; ++c) total += counts[c][rz];
    pi[rz] = static_cast<double>(total) / static_cast<double>(M_int);
  }

  CredibleBoundResult out;
  out.pi_sample = pi;
  out.report.method = "bayes-credible";
  out.report.bound = empirical_quantile_upper(pi, 1.0 - alpha);
  out.report.level = 1.0 - alpha;
  out.report.successes = 0;
  out.report.trials = 0;
  out.report.inputs = {{"rho", rho},
                       {"alpha", alpha},
                       {"grid_points", grid.n()},
                       {"realizations", n_realizations},
                       {"M_int", M_int},
                       {"seed", seed}};
  return out;
}

void save_pi_sample_csv(const Eigen::VectorXd& pi_sample,
                        const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.precision(17);
  f << "pi\n";
  for (Eigen::Index i = 0; i < pi_sample.size(); ++i) f << pi_sample[i] << '\n';
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace rarebound
