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

#include "rarebound/bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rarebound/rng.hpp"

namespace rarebound {

namespace {

/// Continued fraction for the incomplete beta function (modified Lentz).
long double beta_cf(long double a, long double b, long double x) {
  constexpr long double tiny = 1e-300L;
  constexpr long double eps = 1e-19L;
  const long double qab = a + b, qap = a + 1.0L, qam = a - 1.0L;
  long double c = 1.0L;
  long double d = 1.0L - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0L / d;
  long double h = d;
  for (int m = 1; m <= 500; ++m) {
    const long double m2 = 2.0L * m;
    long double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0L + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0L + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0L + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0L + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0L) < eps) break;
  }
  return h;
}

long double reg_inc_beta_l(long double a, long double b, long double x) {
  if (x <= 0.0L) return 0.0L;
  if (x >= 1.0L) return 1.0L;
  // exponent in long double: front = x^a (1-x)^b / (a B(a,b))
  const long double lg =
      lgammal(a + b) - lgammal(a) - lgammal(b) + a * logl(x) + b * log1pl(-x);
  const long double front = expl(lg);
  if (x < (a + 1.0L) / (a + b + 2.0L)) return front * beta_cf(a, b, x) / a;
  return 1.0L - front * beta_cf(b, a, 1.0L - x) / b;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw PreconditionError("reg_inc_beta needs a, b > 0");
  return static_cast<double>(reg_inc_beta_l(a, b, x));
}

double binomial_cdf(std::int64_t T, std::int64_t N, double p) {
  if (N < 1) throw PreconditionError("binomial_cdf needs N >= 1");
  if (T < 0) return 0.0;
  if (T >= N) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  // P(X <= T) = I_{1-p}(N - T, T + 1)
  return static_cast<double>(reg_inc_beta_l(
      static_cast<long double>(N - T), static_cast<long double>(T + 1),
      1.0L - static_cast<long double>(p)));
}

double binomial_upper_bound(std::int64_t T, std::int64_t N, double alpha) {
  if (N < 1 || T < 0 || T > N)
    throw PreconditionError("binomial_upper_bound needs 0 <= T <= N, N >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw PreconditionError("binomial_upper_bound needs alpha in (0,1)");
  if (T == N) return 1.0;
  if (T == 0) return -std::expm1(std::log(alpha) / static_cast<double>(N));

  // The CDF is strictly decreasing in b; bisect to machine resolution (the
  // root certificate tolerance needs the full ~50-60 halvings). The bracket
  // starts at the point estimate T/N, falling back to [0, T/N] for large
  // alpha.
  double lo = static_cast<double>(T) / static_cast<double>(N);
  double hi = 1.0;
  if (binomial_cdf(T, N, lo) < alpha) {
    hi = lo;
    lo = 0.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted
    if (binomial_cdf(T, N, mid) >= alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::int64_t min_calls_for_zero_count_bound(double alpha, double target) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw PreconditionError("alpha must be in (0,1)");
  if (!(target > 0.0 && target < 1.0))
    throw PreconditionError("target must be in (0,1)");
  const auto bound_at = [alpha](std::int64_t N) {
    return -std::expm1(std::log(alpha) / static_cast<double>(N));
  };
  auto N = static_cast<std::int64_t>(
      std::ceil(std::log(alpha) / std::log1p(-target)));
  if (N < 1) N = 1;
  // The closed form can be off by one at the boundary; settle it exactly.
  while (N > 1 && bound_at(N - 1) <= target) --N;
  while (bound_at(N) > target) ++N;
  return N;
}

BoundReport crude_mc_bound(BudgetedObjective& obj, const InputDistribution& dist,
                           std::int64_t N, double rho, double alpha,
                           std::uint64_t seed) {
  if (N < 1) throw PreconditionError("crude_mc_bound needs N >= 1");
  if (obj.budget_remaining() < static_cast<std::uint64_t>(N))
    throw BudgetExhausted("crude_mc_bound needs " + std::to_string(N) +
                          " remaining calls");
  const std::uint64_t budget_before = obj.budget_used();
  std::int64_t gamma = 0;
  Eigen::VectorXd x(dist.dim());
  for (std::int64_t i = 0; i < N; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    dist.sample(rng, x);
    if (obj.eval(x) < rho) ++gamma;
  }
  BoundReport rep;
  rep.method = "crude-mc";
  rep.bound = binomial_upper_bound(gamma, N, alpha);
  rep.level = 1.0 - alpha;
  rep.successes = gamma;
  rep.trials = N;
  rep.inputs = {{"rho", rho},
                {"alpha", alpha},
                {"seed", seed},
                {"budget_before", budget_before},
                {"budget_after", obj.budget_used()}};
  return rep;
}

double markov_bound(double pi_mean, double alpha) {
  if (!(pi_mean >= 0.0)) throw PreconditionError("markov_bound needs mean >= 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw PreconditionError("markov_bound needs alpha in (0,1)");
  return std::min(pi_mean / alpha, 1.0);
}

double chebyshev_bound(double pi_mean, double pi_var, double alpha) {
  if (!(pi_var >= 0.0))
    throw PreconditionError("chebyshev_bound needs variance >= 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw PreconditionError("chebyshev_bound needs alpha in (0,1)");
  return std::min(pi_mean + std::sqrt(pi_var / alpha), 1.0);
}

nlohmann::json BoundReport::to_json() const {
  return {{"schema_version", kReportSchemaVersion},
          {"method", method},
          {"bound", bound},
          {"level", level},
          {"successes", successes},
          {"trials", trials},
          {"inputs", inputs}};
}

BoundReport BoundReport::from_json(const nlohmann::json& j) {
  BoundReport r;
  r.method = j.at("method").get<std::string>();
  r.bound = j.at("bound").get<double>();
  r.level = j.at("level").get<double>();
  r.successes = j.value("successes", std::int64_t{0});
  r.trials = j.value("trials", std::int64_t{0});
  r.inputs = j.value("inputs", nlohmann::json::object());
  return r;
}

std::string BoundReport::csv_header() {
  return "method,bound,level,successes,trials";
}

std::string BoundReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << method << ',' << bound << ',' << level << ',' << successes << ','
     << trials;
  return os.str();
}

}  // namespace rarebound
