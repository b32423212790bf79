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

#include "rarebound/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "parallel.hpp"
#include "rarebound/rng.hpp"
#include "rarebound/simd.hpp"

namespace rarebound {

int default_threads() {
  if (const char* env = std::getenv("RAREBOUND_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// ---- synthetic 26-d stand-in -------------------------------------------------

double synthetic26_f(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Synthetic26Params& params) {
  const int d = static_cast<int>(x.size());
  double quad = 0.0, sum = 0.0;
  for (int j = 0; j < d; ++j) {
    const double w = std::exp(-static_cast<double>(j) / 8.0);
    const double diff = x[j] - 0.5;
    quad += w * diff * diff;
    sum += x[j];
  }
  return params.offset + params.quad_amp * quad +
         params.sin_amp * std::sin(params.sin_freq * sum);
}

Box synthetic26_box() { return Box::cube(0.0, 1.0, 26); }

BudgetedObjective make_synthetic26_objective(const Synthetic26Params& params,
                                             std::uint64_t budget) {
  return BudgetedObjective(
      [params](const Eigen::VectorXd& x) { return synthetic26_f(x, params); },
      synthetic26_box(), budget);
}

// ---- config -------------------------------------------------------------------

namespace {

CampaignConfig::Objective objective_from_name(const std::string& s) {
  if (s == "toy") return CampaignConfig::Objective::toy;
  if (s == "external") return CampaignConfig::Objective::external;
  if (s == "synthetic26") return CampaignConfig::Objective::synthetic26;
  throw PreconditionError("unknown objective: " + s);
}

const char* objective_name(CampaignConfig::Objective o) {
  switch (o) {
    case CampaignConfig::Objective::toy: return "toy";
    case CampaignConfig::Objective::external: return "external";
    case CampaignConfig::Objective::synthetic26: return "synthetic26";
  }
  return "toy";
}

CampaignConfig::DesignMethod design_from_name(const std::string& s) {
  if (s == "lhs-maximin") return CampaignConfig::DesignMethod::lhs_maximin;
  if (s == "sequential-proxy")
    return CampaignConfig::DesignMethod::sequential_proxy;
  throw PreconditionError("unknown design method: " + s);
}

const char* design_name(CampaignConfig::DesignMethod m) {
  return m == CampaignConfig::DesignMethod::lhs_maximin ? "lhs-maximin"
                                                        : "sequential-proxy";
}

}  // namespace

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
  CampaignConfig c;
  c.objective = objective_from_name(j.value("objective", "toy"));
  c.external_command = j.value("external_command", "");
  c.external_timeout_sec = j.value("external_timeout_sec", 30.0);
  if (j.contains("synthetic26")) {
    const auto& s = j.at("synthetic26");
    c.synth.offset = s.value("offset", c.synth.offset);
    c.synth.quad_amp = s.value("quad_amp", c.synth.quad_amp);
    c.synth.sin_amp = s.value("sin_amp", c.synth.sin_amp);
    c.synth.sin_freq = s.value("sin_freq", c.synth.sin_freq);
  }
  c.budget = j.value("budget", c.budget);
  c.n_design = j.value("n", c.n_design);
  c.m_is = j.value("m", c.m_is);
  c.rho = j.value("rho", c.rho);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.bayes_alpha = j.value("bayes_alpha", c.bayes_alpha);
  c.kappa = j.value("kappa", c.kappa);
  c.marker_safe = j.value("marker_safe", c.marker_safe);
  c.marker_unsafe = j.value("marker_unsafe", c.marker_unsafe);
  c.stage1_null_threshold =
      j.value("stage1_null_threshold", c.stage1_null_threshold);
  c.design_method = design_from_name(j.value("design_method", "lhs-maximin"));
  c.anneal_iterations = j.value("anneal_iterations", c.anneal_iterations);
  c.refit_every = j.value("refit_every", c.refit_every);
  c.candidate_pool = j.value("candidate_pool", c.candidate_pool);
  if (j.contains("mc")) {
    const auto& m = j.at("mc");
    c.mc.pi_mean = m.value("pi_mean", c.mc.pi_mean);
    c.mc.region = m.value("region", c.mc.region);
    c.mc.bias = m.value("bias", c.mc.bias);
    c.mc.tune = m.value("tune", c.mc.tune);
    c.mc.integration = m.value("integration", c.mc.integration);
    c.mc.oracle = m.value("oracle", c.mc.oracle);
    c.mc.grid_points = m.value("grid_points", c.mc.grid_points);
    c.mc.realizations = m.value("realizations", c.mc.realizations);
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    c.fit.multistarts = f.value("multistarts", c.fit.multistarts);
    c.fit.theta_min = f.value("theta_min", c.fit.theta_min);
    c.fit.theta_max = f.value("theta_max", c.fit.theta_max);
    c.fit.anisotropic = f.value("anisotropic", c.fit.anisotropic);
    c.fit.polish_iterations =
        f.value("polish_iterations", c.fit.polish_iterations);
  }
  c.threads = j.value("threads", c.threads);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  if (c.n_design + c.m_is > c.budget)
    throw PreconditionError("n + m must not exceed the budget");
  return c;
}

nlohmann::json CampaignConfig::to_json() const {
  return {{"schema_version", kReportSchemaVersion},
          {"objective", objective_name(objective)},
          {"external_command", external_command},
          {"external_timeout_sec", external_timeout_sec},
          {"synthetic26",
           {{"offset", synth.offset},
            {"quad_amp", synth.quad_amp},
            {"sin_amp", synth.sin_amp},
            {"sin_freq", synth.sin_freq}}},
          {"budget", budget},
          {"n", n_design},
          {"m", m_is},
          {"rho", rho},
          {"alpha", alpha},
          {"beta", beta},
          {"bayes_alpha", bayes_alpha},
          {"kappa", kappa},
          {"marker_safe", marker_safe},
          {"marker_unsafe", marker_unsafe},
          {"stage1_null_threshold", stage1_null_threshold},
          {"design_method", design_name(design_method)},
          {"anneal_iterations", anneal_iterations},
          {"refit_every", refit_every},
          {"candidate_pool", candidate_pool},
          {"mc",
           {{"pi_mean", mc.pi_mean},
            {"region", mc.region},
            {"bias", mc.bias},
            {"tune", mc.tune},
            {"integration", mc.integration},
            {"oracle", mc.oracle},
            {"grid_points", mc.grid_points},
            {"realizations", mc.realizations}}},
          {"fit",
           {{"multistarts", fit.multistarts},
            {"theta_min", fit.theta_min},
            {"theta_max", fit.theta_max},
            {"anisotropic", fit.anisotropic},
            {"polish_iterations", fit.polish_iterations}}},
          {"threads", threads},
          {"seed", seed},
          {"out_dir", out_dir}};
}

Box CampaignConfig::domain() const {
  switch (objective) {
    case Objective::toy: return toy_box();
    case Objective::synthetic26: return synthetic26_box();
    case Objective::external: return toy_box();  // overridden by callers
  }
  return toy_box();
}

InputDistribution CampaignConfig::input_distribution() const {
  return InputDistribution::uniform_on_box(domain());
}

BudgetedObjective CampaignConfig::make_objective() const {
  return make_objective(static_cast<std::uint64_t>(budget));
}

BudgetedObjective CampaignConfig::make_objective(
    std::uint64_t budget_override) const {
  switch (objective) {
    case Objective::toy: return make_toy_objective(budget_override);
    case Objective::synthetic26:
      return make_synthetic26_objective(synth, budget_override);
    case Objective::external: {
      ExternalProcessConfig pc;
      pc.command = external_command;
      pc.timeout_sec = external_timeout_sec;
      return make_external_objective(pc, domain(), budget_override);
    }
  }
  return make_toy_objective(budget_override);
}

// ---- designs -------------------------------------------------------------------

namespace {

Design evaluate_design(BudgetedObjective& obj, Design design) {
  Eigen::VectorXd y(design.n());
  for (int i = 0; i < design.n(); ++i) y[i] = obj.eval(design.points.row(i));
  design.outputs = y;
  return design;
}

}  // namespace

std::pair<Design, GpModel> build_design(const CampaignConfig& config,
                                        BudgetedObjective& obj, int n_points,
                                        std::uint64_t seed) {
  const Box& box = obj.domain();
  const int d = box.dim();
  AnnealSchedule schedule;

  if (config.design_method == CampaignConfig::DesignMethod::lhs_maximin) {
    Design unit = maximin_anneal(lhs(n_points, d, derive_seed(seed, 1)),
                                 config.anneal_iterations, schedule,
                                 derive_seed(seed, 2));
    Design design = evaluate_design(obj, scale_to_box(unit, box));
    GpModel model = GpModel::fit(design, TrendSpec::intercept(), config.fit,
                                 derive_seed(seed, 3));
    return {std::move(design), std::move(model)};
  }

  // sequential proxy: 80% space-filling start, 20% added at the
  // misclassification-proxy argmax over a fresh uniform candidate pool
  const int n0 = std::max(2, static_cast<int>(std::lround(0.8 * n_points)));
  Design unit = maximin_anneal(lhs(n0, d, derive_seed(seed, 1)),
                               config.anneal_iterations, schedule,
                               derive_seed(seed, 2));
  Design design = evaluate_design(obj, scale_to_box(unit, box));
  GpModel model = GpModel::fit(design, TrendSpec::intercept(), config.fit,
                               derive_seed(seed, 3));
  int since_refit = 0;
  for (int k = n0; k < n_points; ++k) {
    Rng rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(k)));
    Eigen::MatrixXd cand(config.candidate_pool, d);
    for (int i = 0; i < config.candidate_pool; ++i)
      for (int j = 0; j < d; ++j)
        cand(i, j) = rng.uniform(box.lower[j], box.upper[j]);
    const Eigen::VectorXd next = sequential_augment(model, config.rho, cand);
    const double y = obj.eval(next);
    design.points.conservativeResize(design.n() + 1, d);
    design.points.row(design.n() - 1) = next;
    design.outputs->conservativeResize(design.n());
    (*design.outputs)[design.n() - 1] = y;
    if (++since_refit >= config.refit_every || k == n_points - 1) {
      model = GpModel::fit(design, TrendSpec::intercept(), config.fit,
                           derive_seed(seed, 3));
      since_refit = 0;
    }
  }
  return {std::move(design), std::move(model)};
}

// ---- classification --------------------------------------------------------------

const char* verdict_name(Classification::Verdict verdict) {
  switch (verdict) {
    case Classification::Verdict::totally_safe: return "totally-safe";
    case Classification::Verdict::relatively_safe: return "relatively-safe";
    case Classification::Verdict::unsafe: return "unsafe";
  }
  return "relatively-safe";
}

Classification::Verdict stage2_verdict(double bound, double marker_safe,
                                       double marker_unsafe) {
  if (bound <= marker_safe) return Classification::Verdict::totally_safe;
  if (bound >= marker_unsafe) return Classification::Verdict::unsafe;
  return Classification::Verdict::relatively_safe;
}

nlohmann::json Classification::to_json() const {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : reports) reps.push_back(r.to_json());
  return {{"schema_version", kReportSchemaVersion},
          {"verdict", verdict_name(verdict)},
          {"stage", stage},
          {"pi_mean_stage1", pi_mean_stage1},
          {"pi_mean_se", pi_mean_se},
          {"no_crossing", no_crossing},
          {"budget_used", budget_used},
          {"reports", reps}};
}

Classification classify_point(BudgetedObjective& obj,
                              const CampaignConfig& config,
                              std::uint64_t seed) {
  const InputDistribution dist = InputDistribution::uniform_on_box(obj.domain());
  const std::uint64_t before = obj.budget_used();
  if (obj.budget_remaining() < static_cast<std::uint64_t>(config.n_design))
    throw BudgetExhausted("stage 1 needs " + std::to_string(config.n_design) +
                          " calls");

  Classification out;
  auto [design, model] =
      build_design(config, obj, config.n_design, derive_seed(seed, 1));

  const PiPosteriorSummary epi =
      posterior_pi_mean(model, dist, config.mc.pi_mean, config.rho,
                        derive_seed(seed, 2), config.threads);
  out.pi_mean_stage1 = epi.mean;
  out.pi_mean_se = epi.se_mean;

  // stage-1 Markov report: bound E/alpha at level 1-alpha with
  // alpha = marker_safe / 2 (the inequality applied literally)
  {
    BoundReport markov;
    markov.method = "markov";
    const double a = config.marker_safe / 2.0;
    markov.bound = markov_bound(epi.mean, a);
    markov.level = 1.0 - a;
    markov.inputs = {{"pi_mean", epi.mean},
                     {"pi_mean_se", epi.se_mean},
                     {"mc_samples", epi.mc_samples},
                     {"alpha", a},
                     {"note", "markov inequality applied literally: "
                              "bound = E(Pi)/alpha at level 1-alpha"}};
    out.reports.push_back(std::move(markov));
  }

  if (epi.mean <= config.stage1_null_threshold) {
    out.verdict = Classification::Verdict::totally_safe;
    out.stage = 1;
    out.budget_used = static_cast<std::int64_t>(obj.budget_used() - before);
    return out;
  }
  if (epi.mean >= config.marker_unsafe) {
    out.verdict = Classification::Verdict::unsafe;
    out.stage = 1;
    out.budget_used = static_cast<std::int64_t>(obj.budget_used() - before);
    return out;
  }

  // stage 2
  out.stage = 2;
  if (obj.budget_remaining() < static_cast<std::uint64_t>(config.m_is))
    throw BudgetExhausted("stage 2 needs " + std::to_string(config.m_is) +
                          " calls");
  const KappaTuneResult tune =
      tune_kappa(model, config.rho, dist, config.mc.tune, config.m_is,
                 derive_seed(seed, 3), config.threads);
  const BiasBound cb =
      bias_bound_c(model, tune.region, dist, config.mc.bias, config.rho,
                   derive_seed(seed, 4), config.threads);
  const IsEstimateResult is =
      is_estimate(obj, tune.retained, config.rho, tune.prob.p);

  MbisResult record;
  record.gamma = is.gamma;
  record.m = config.m_is;
  record.prob_region = tune.prob.p;
  record.c_kappa = cb.c;
  record.kappa = tune.kappa;
  record.budget_used = static_cast<std::int64_t>(obj.budget_used() - before);
  record.inputs = {{"seed", seed},
                   {"M_tune", config.mc.tune},
                   {"M_bias", cb.mc_samples},
                   {"prob_region_se", tune.prob.se},
                   {"c_se", cb.se}};

  double bound2a0 = 1.0;
  try {
    const Alpha0Result a0 = alpha0_search(is.gamma, config.m_is, tune.prob.p,
                                          cb.c);
    bound2a0 = a0.bound;
    record.alpha = a0.alpha0;
    record.beta = a0.alpha0;
    record.level = 1.0 - 2.0 * a0.alpha0;
    record.bound = bound2a0;
    out.verdict = stage2_verdict(bound2a0, config.marker_safe,
                                 config.marker_unsafe);
  } catch (const NoCrossing&) {
    out.no_crossing = true;
    out.verdict = Classification::Verdict::relatively_safe;
    record.alpha = record.beta = 0.0;
    record.level = 0.0;
    record.bound = 1.0;
  }

  BoundReport mbis_rep;
  mbis_rep.method = "mbis";
  mbis_rep.bound = record.bound;
  mbis_rep.level = record.level;
  mbis_rep.successes = record.gamma;
  mbis_rep.trials = record.m;
  mbis_rep.inputs = record.to_json();
  out.reports.push_back(std::move(mbis_rep));
  out.budget_used = static_cast<std::int64_t>(obj.budget_used() - before);
  return out;
}

// ---- oracle -----------------------------------------------------------------------

OracleEstimate oracle_pi(const InputDistribution& dist, double rho,
                         std::int64_t M, std::uint64_t seed) {
  if (M < 1000000) throw PreconditionError("oracle_pi needs M >= 1e6");
  if (dist.dim() != 2)
    throw PreconditionError("oracle_pi evaluates the 2-d toy function");
  constexpr std::int64_t chunk = 65536;
  const std::int64_t chunks = (M + chunk - 1) / chunk;
  std::int64_t count = 0;
  Eigen::VectorXd y(chunk);
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t k = std::min<std::int64_t>(chunk, M - c * chunk);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const Eigen::MatrixXd X = dist.sample_matrix(rng, k);
    toy_f_batch(X, y.head(k));
    count += static_cast<std::int64_t>(
        simd::count_less(y.data(), static_cast<std::size_t>(k), rho));
  }
  OracleEstimate out;
  out.mc_samples = M;
  out.p = static_cast<double>(count) / static_cast<double>(M);
  out.se = std::sqrt(out.p * (1.0 - out.p) / static_cast<double>(M));
  return out;
}

// ---- repetition study ---------------------------------------------------------------

namespace {

double quantile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  if (n == 1) return v[0];
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

void finalize_stats(StudyMethodStats& s) {
  if (s.bounds.empty()) return;
  s.min = *std::min_element(s.bounds.begin(), s.bounds.end());
  s.max = *std::max_element(s.bounds.begin(), s.bounds.end());
  s.q1 = quantile_type7(s.bounds, 0.25);
  s.median = quantile_type7(s.bounds, 0.5);
  s.q3 = quantile_type7(s.bounds, 0.75);
  double acc = 0.0;
  for (const double b : s.bounds) acc += b;
  s.mean = acc / static_cast<double>(s.bounds.size());
}

Design regular_or_lhs_grid(const Box& box, int T, int d, std::uint64_t seed) {
  if (d <= 3) {
    const int per = std::max(2, static_cast<int>(std::lround(
                                    std::pow(static_cast<double>(T),
                                             1.0 / static_cast<double>(d)))));
    std::vector<int> idx(d, 0);
    Design g;
    g.points.resize(static_cast<int>(std::pow(per, d)), d);
    for (int row = 0; row < g.n(); ++row) {
      int rem = row;
      for (int j = 0; j < d; ++j) {
        const int k = rem % per;
        rem /= per;
        g.points(row, j) =
            box.lower[j] + (box.upper[j] - box.lower[j]) * k / (per - 1);
      }
    }
    return g;
  }
  return scale_to_box(lhs(T, d, seed), box);
}

}  // namespace

nlohmann::json StudyResult::to_json() const {
  const auto stats_json = [](const StudyMethodStats& s) {
    return nlohmann::json{{"count", s.bounds.size()},
                          {"failures", s.failures},
                          {"covered", s.covered},
                          {"min_x1e4", s.min * 1e4},
                          {"q1_x1e4", s.q1 * 1e4},
                          {"mean_x1e4", s.mean * 1e4},
                          {"median_x1e4", s.median * 1e4},
                          {"q3_x1e4", s.q3 * 1e4},
                          {"max_x1e4", s.max * 1e4}};
  };
  return {{"schema_version", kReportSchemaVersion},
          {"repetitions", repetitions},
          {"design", design_label},
          {"oracle_pi", oracle.p},
          {"oracle_se", oracle.se},
          {"bayes_credible_98", stats_json(bayes)},
          {"mbis_98", stats_json(mbis)}};
}

std::string StudyResult::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "rep,method,design,bound\n";
  for (std::size_t i = 0; i < bayes.bounds.size(); ++i)
    os << i << ",bayes-credible," << design_label << ',' << bayes.bounds[i]
       << '\n';
  for (std::size_t i = 0; i < mbis.bounds.size(); ++i)
    os << i << ",mbis," << design_label << ',' << mbis.bounds[i] << '\n';
  return os.str();
}

StudyResult run_toy_study(const CampaignConfig& config, int repetitions,
                          std::uint64_t seed) {
  if (repetitions < 1) throw PreconditionError("need at least one repetition");
  if (config.objective != CampaignConfig::Objective::toy)
    throw PreconditionError("the repetition study runs on the toy objective");

  const InputDistribution dist = config.input_distribution();
  StudyResult result;
  result.repetitions = repetitions;
  result.design_label =
      config.design_method == CampaignConfig::DesignMethod::lhs_maximin
          ? "lhs-maximin"
          : "misclassification-proxy";
  result.oracle = oracle_pi(dist, config.rho, config.mc.oracle,
                            derive_seed(seed, 0xFFFF));

  struct RepOutcome {
    double bayes = -1.0;  // negative = failed
    double mbis = -1.0;
  };
  std::vector<RepOutcome> outcomes(repetitions);

  parallel_for(repetitions, config.threads, [&](std::int64_t rep) {
    const std::uint64_t rs = derive_seed(seed, static_cast<std::uint64_t>(rep));
    CampaignConfig local = config;
    local.threads = 1;  // repetitions already run in parallel

    // Bayesian strategy: all N calls go into the metamodel
    try {
      BudgetedObjective obj = local.make_objective(
          static_cast<std::uint64_t>(local.budget));
      auto [design, model] = build_design(
          local, obj, static_cast<int>(local.budget), derive_seed(rs, 1));
      Design grid = regular_or_lhs_grid(toy_box(), local.mc.grid_points, 2,
                                        derive_seed(rs, 2));
      grid = grid_repair(grid, model.design(), toy_box(),
                         0.01 * toy_box().diagonal(), derive_seed(rs, 3));
      const CredibleBoundResult cb = credible_bound(
          model, dist, grid, local.mc.realizations, local.mc.integration,
          local.rho, local.bayes_alpha, derive_seed(rs, 4));
      outcomes[rep].bayes = cb.report.bound;
    } catch (const Error&) {
      outcomes[rep].bayes = -1.0;
    }

    // MBIS strategy: n for the metamodel, m importance calls, fixed kappa
    try {
      BudgetedObjective obj = local.make_objective(
          static_cast<std::uint64_t>(local.n_design + local.m_is));
      auto [design, model] =
          build_design(local, obj, local.n_design, derive_seed(rs, 10));
      const CriticalRegion region =
          critical_region(model, local.rho, local.kappa);
      const RegionProbability prob = region_probability(
          region, dist, local.mc.region, derive_seed(rs, 11));
      const BiasBound cb = bias_bound_c(model, region, dist, local.mc.bias,
                                        local.rho, derive_seed(rs, 12));
      const Eigen::MatrixXd Z =
          sample_importance(region, dist, local.m_is, derive_seed(rs, 13));
      const IsEstimateResult is = is_estimate(obj, Z, local.rho, prob.p);
      const BoundReport rep_bound = mbis_bound(is.gamma, local.m_is, prob.p,
                                               cb.c, local.alpha, local.beta);
      outcomes[rep].mbis = rep_bound.bound;
    } catch (const Error&) {
      outcomes[rep].mbis = -1.0;
    }
  });

  for (const auto& o : outcomes) {
    if (o.bayes >= 0.0) {
      result.bayes.bounds.push_back(o.bayes);
      if (o.bayes >= result.oracle.p) ++result.bayes.covered;
    } else {
      ++result.bayes.failures;
    }
    if (o.mbis >= 0.0) {
      result.mbis.bounds.push_back(o.mbis);
      if (o.mbis >= result.oracle.p) ++result.mbis.covered;
    } else {
      ++result.mbis.failures;
    }
  }
  finalize_stats(result.bayes);
  finalize_stats(result.mbis);
  return result;
}

}  // namespace rarebound
