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

// Command-line front end: design / fit / crossval / bound / classify /
// study / oracle. Exit codes: 0 success, 2 precondition violation, 3 budget
// exhausted, 4 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rarebound/campaign.hpp"
#include "rarebound/simd.hpp"

namespace {

using rarebound::CampaignConfig;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::int64_t budget = -1;
  int threads = 0;
  bool have_seed = false;
};

CampaignConfig load_config(const GlobalOpts& g) {
  CampaignConfig cfg;
  if (!g.config_path.empty()) {
    std::ifstream f(g.config_path);
    if (!f) throw rarebound::IoError("cannot open config: " + g.config_path);
    nlohmann::json j;
    f >> j;
    cfg = CampaignConfig::from_json(j);
  }
  if (g.have_seed) cfg.seed = g.seed;
  if (g.budget >= 0) cfg.budget = g.budget;
  if (g.threads > 0) cfg.threads = g.threads;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (cfg.threads <= 0) cfg.threads = rarebound::default_threads();
  return cfg;
}

std::string out_path(const CampaignConfig& cfg, const std::string& name) {
  if (cfg.out_dir.empty()) return name;
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void emit_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << std::endl;
    return;
  }
  std::ofstream f(path);
  if (!f) throw rarebound::IoError("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
  std::cout << path << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rarebound: upper bounds on rare-event probabilities for "
               "expensive black-box functions under a hard call budget"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "configuration file (JSON)");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--seed", g.seed, "master seed")
      ->each([&](const std::string&) { g.have_seed = true; });
  app.add_option("--budget", g.budget, "override the call budget");
  app.add_option("--threads", g.threads, "worker threads");

  auto* sc_design = app.add_subcommand("design", "emit an LHS-maximin design CSV");
  int d_n = 50, d_dim = 2, d_iters = 10000;
  std::string d_out;
  bool d_unit = false;
  sc_design->add_option("--n", d_n, "points");
  sc_design->add_option("--dim", d_dim, "dimension");
  sc_design->add_option("--iterations", d_iters, "annealing iterations");
  sc_design->add_option("--out", d_out, "output CSV path");
  sc_design->add_flag("--unit", d_unit, "keep the unit cube (no scaling)");

  auto* sc_fit = app.add_subcommand("fit", "fit the metamodel and serialize it");
  std::string f_design, f_out;
  bool f_aniso = false;
  sc_fit->add_option("--design", f_design, "design CSV with outputs")->required();
  sc_fit->add_option("--out", f_out, "model JSON path");
  sc_fit->add_flag("--anisotropic", f_aniso, "one theta per dimension");

  auto* sc_cv = app.add_subcommand("crossval", "leave-one-out validation report");
  std::string cv_model, cv_out;
  bool cv_literal = false;
  sc_cv->add_option("--model", cv_model, "model JSON")->required();
  sc_cv->add_option("--out", cv_out, "report path");
  sc_cv->add_flag("--literal-scaling", cv_literal,
                  "divide by the variance instead of the standard deviation");

  auto* sc_bound = app.add_subcommand("bound", "compute an upper bound");
  sc_bound->require_subcommand(1);

  auto* sc_crude = sc_bound->add_subcommand("crude", "crude Monte Carlo bound");
  std::int64_t cr_n = -1;
  double cr_rho = std::nan(""), cr_alpha = std::nan("");
  std::string cr_out;
  sc_crude->add_option("--n", cr_n, "MC sample size (defaults to the budget)");
  sc_crude->add_option("--rho", cr_rho, "threshold");
  sc_crude->add_option("--alpha", cr_alpha, "risk level");
  sc_crude->add_option("--out", cr_out, "report path");

  auto* sc_bayes = sc_bound->add_subcommand(
      "bayes", "credible bound by conditional simulation");
  std::string by_model, by_out, by_pi_csv;
  int by_grid = -1, by_real = -1;
  std::int64_t by_mint = -1;
  double by_rho = std::nan(""), by_alpha = std::nan("");
  bool by_force_dim = false;
  sc_bayes->add_option("--model", by_model, "model JSON")->required();
  sc_bayes->add_option("--grid-points", by_grid, "grid size T");
  sc_bayes->add_option("--realizations", by_real, "conditional draws");
  sc_bayes->add_option("--m-int", by_mint, "integration sample per draw");
  sc_bayes->add_option("--rho", by_rho, "threshold");
  sc_bayes->add_option("--alpha", by_alpha, "risk level");
  sc_bayes->add_option("--pi-csv", by_pi_csv, "dump the Pi sample to CSV");
  sc_bayes->add_flag("--allow-high-dim", by_force_dim,
                     "override the dimension guard");
  sc_bayes->add_option("--out", by_out, "report path");

  auto* sc_mbis = sc_bound->add_subcommand(
      "mbis", "metamodel-based importance sampling bound");
  std::string mb_model, mb_out;
  int mb_m = -1;
  double mb_kappa = std::nan(""), mb_rho = std::nan("");
  double mb_alpha = std::nan(""), mb_beta = std::nan("");
  bool mb_tune = false, mb_alpha0 = false;
  std::int64_t mb_region = -1, mb_bias = -1, mb_tune_m = -1;
  sc_mbis->add_option("--model", mb_model, "model JSON")->required();
  sc_mbis->add_option("--m", mb_m, "importance-sampling calls");
  sc_mbis->add_option("--kappa", mb_kappa, "fixed region half-width");
  sc_mbis->add_flag("--tune", mb_tune, "tune kappa to hit m members");
  sc_mbis->add_flag("--alpha0", mb_alpha0, "level-matched bound (alpha = beta)");
  sc_mbis->add_option("--m-region", mb_region, "region probability MC size");
  sc_mbis->add_option("--m-bias", mb_bias, "bias bound MC size");
  sc_mbis->add_option("--m-tune", mb_tune_m, "tuning sample size");
  sc_mbis->add_option("--rho", mb_rho, "threshold");
  sc_mbis->add_option("--alpha", mb_alpha, "binomial-side risk");
  sc_mbis->add_option("--beta", mb_beta, "bias-side risk");
  sc_mbis->add_option("--out", mb_out, "report path");

  auto* sc_classify = app.add_subcommand("classify", "two-step verdict");
  std::string cl_out;
  sc_classify->add_option("--out", cl_out, "report path");

  auto* sc_study = app.add_subcommand(
      "study", "repetition study on the toy problem (summary tables)");
  int st_reps = 100;
  sc_study->add_option("--reps", st_reps, "repetitions");

  auto* sc_oracle = app.add_subcommand(
      "oracle", "massive direct MC of the toy failure probability");
  double or_rho = 0.01;
  std::int64_t or_m = 10000000;
  std::string or_out;
  sc_oracle->add_option("--rho", or_rho, "threshold");
  sc_oracle->add_option("--m", or_m, "MC sample size");
  sc_oracle->add_option("--out", or_out, "report path");

  // global flags remain usable after a subcommand name
  app.fallthrough();
  for (auto* sub : app.get_subcommands({})) {
    sub->fallthrough();
    for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    CampaignConfig cfg = load_config(g);

    if (sc_design->parsed()) {
      rarebound::Design design = rarebound::maximin_anneal(
          rarebound::lhs(d_n, d_dim, cfg.seed), d_iters, {},
          rarebound::derive_seed(cfg.seed, 1));
      if (!d_unit) {
        if (cfg.domain().dim() != d_dim)
          throw rarebound::PreconditionError(
              "--dim does not match the objective domain; use --unit");
        design = rarebound::scale_to_box(design, cfg.domain());
      }
      const std::string path =
          d_out.empty() ? out_path(cfg, "design.csv") : d_out;
      rarebound::save_design_csv(design, path);
      std::cout << path << std::endl;
    } else if (sc_fit->parsed()) {
      const rarebound::Design design = rarebound::load_design_csv(f_design);
      if (!design.has_outputs())
        throw rarebound::PreconditionError("design CSV must have a y column");
      rarebound::FitConfig fc = cfg.fit;
      fc.anisotropic = f_aniso || fc.anisotropic;
      fc.threads = cfg.threads;
      const rarebound::GpModel model = rarebound::GpModel::fit(
          design, rarebound::TrendSpec::intercept(), fc, cfg.seed);
      const std::string path = f_out.empty() ? out_path(cfg, "model.json") : f_out;
      model.save(path);
      std::cout << path << std::endl;
    } else if (sc_cv->parsed()) {
      const rarebound::GpModel model = rarebound::GpModel::load(cv_model);
      const rarebound::LooReport loo = model.loo_residuals(
          cv_literal ? rarebound::LooScaling::variance
                     : rarebound::LooScaling::std_deviation);
      const nlohmann::json j = {
          {"schema_version", rarebound::kReportSchemaVersion},
          {"fraction_in_band", loo.fraction_in_band},
          {"band", {-3.0, 3.0}},
          {"scaling", cv_literal ? "variance" : "std-deviation"},
          {"max_abs", loo.standardized.cwiseAbs().maxCoeff()},
          {"residuals",
           std::vector<double>(
               loo.standardized.data(),
               loo.standardized.data() + loo.standardized.size())}};
      emit_json(j, cv_out);
    } else if (sc_crude->parsed()) {
      rarebound::BudgetedObjective obj = cfg.make_objective();
      const std::int64_t n = cr_n > 0 ? cr_n : cfg.budget;
      const double rho = std::isnan(cr_rho) ? cfg.rho : cr_rho;
      const double alpha = std::isnan(cr_alpha) ? cfg.bayes_alpha : cr_alpha;
      const rarebound::BoundReport rep = rarebound::crude_mc_bound(
          obj, cfg.input_distribution(), n, rho, alpha, cfg.seed);
      emit_json(rep.to_json(), cr_out);
    } else if (sc_bayes->parsed()) {
      const rarebound::GpModel model = rarebound::GpModel::load(by_model);
      const rarebound::Box box = cfg.domain();
      if (box.dim() != model.dim())
        throw rarebound::PreconditionError(
            "model dimension does not match the objective domain");
      const rarebound::InputDistribution dist = cfg.input_distribution();
      const int T = by_grid > 0 ? by_grid : cfg.mc.grid_points;
      const int R = by_real > 0 ? by_real : cfg.mc.realizations;
      const std::int64_t Mint = by_mint > 0 ? by_mint : cfg.mc.integration;
      const double rho = std::isnan(by_rho) ? cfg.rho : by_rho;
      const double alpha = std::isnan(by_alpha) ? cfg.bayes_alpha : by_alpha;
      rarebound::Design grid = rarebound::scale_to_box(
          rarebound::lhs(T, model.dim(), rarebound::derive_seed(cfg.seed, 7)),
          box);
      grid = rarebound::grid_repair(grid, model.design(), box,
                                    0.01 * box.diagonal(),
                                    rarebound::derive_seed(cfg.seed, 8));
      rarebound::CredibleBoundOptions opts;
      opts.allow_high_dim = by_force_dim;
      opts.threads = cfg.threads;
      const rarebound::CredibleBoundResult res = rarebound::credible_bound(
          model, dist, grid, R, Mint, rho, alpha, cfg.seed, opts);
      if (!by_pi_csv.empty())
        rarebound::save_pi_sample_csv(res.pi_sample, by_pi_csv);
      emit_json(res.report.to_json(), by_out);
    } else if (sc_mbis->parsed()) {
      const rarebound::GpModel model = rarebound::GpModel::load(mb_model);
      const rarebound::Box box = cfg.domain();
      if (box.dim() != model.dim())
        throw rarebound::PreconditionError(
            "model dimension does not match the objective domain");
      rarebound::BudgetedObjective obj = cfg.make_objective();
      const rarebound::InputDistribution dist = cfg.input_distribution();
      const int m = mb_m > 0 ? mb_m : cfg.m_is;
      const double rho = std::isnan(mb_rho) ? cfg.rho : mb_rho;
      const double alpha = std::isnan(mb_alpha) ? cfg.alpha : mb_alpha;
      const double beta = std::isnan(mb_beta) ? cfg.beta : mb_beta;
      const std::int64_t Mr = mb_region > 0 ? mb_region : cfg.mc.region;
      const std::int64_t Mb = mb_bias > 0 ? mb_bias : cfg.mc.bias;
      const std::int64_t Mt = mb_tune_m > 0 ? mb_tune_m : cfg.mc.tune;

      rarebound::MbisResult record;
      record.m = m;
      if (mb_tune) {
        const rarebound::KappaTuneResult tune = rarebound::tune_kappa(
            model, rho, dist, Mt, m, rarebound::derive_seed(cfg.seed, 3),
            cfg.threads);
        const rarebound::BiasBound cb = rarebound::bias_bound_c(
            model, tune.region, dist, Mb, rho,
            rarebound::derive_seed(cfg.seed, 4), cfg.threads);
        const rarebound::IsEstimateResult is =
            rarebound::is_estimate(obj, tune.retained, rho, tune.prob.p);
        record.gamma = is.gamma;
        record.prob_region = tune.prob.p;
        record.c_kappa = cb.c;
        record.kappa = tune.kappa;
      } else {
        const double kappa = std::isnan(mb_kappa) ? cfg.kappa : mb_kappa;
        const rarebound::CriticalRegion region =
            rarebound::critical_region(model, rho, kappa);
        const rarebound::RegionProbability prob =
            rarebound::region_probability(
                region, dist, Mr, rarebound::derive_seed(cfg.seed, 3),
                cfg.threads);
        const rarebound::BiasBound cb = rarebound::bias_bound_c(
            model, region, dist, Mb, rho,
            rarebound::derive_seed(cfg.seed, 4), cfg.threads);
        const Eigen::MatrixXd Z = rarebound::sample_importance(
            region, dist, m, rarebound::derive_seed(cfg.seed, 5));
        const rarebound::IsEstimateResult is =
            rarebound::is_estimate(obj, Z, rho, prob.p);
        record.gamma = is.gamma;
        record.prob_region = prob.p;
        record.c_kappa = cb.c;
        record.kappa = kappa;
      }
      record.budget_used = static_cast<std::int64_t>(obj.budget_used());
      record.inputs = {{"seed", cfg.seed},
                       {"M_region", Mr},
                       {"M_bias", Mb},
                       {"M_tune", mb_tune ? Mt : 0},
                       {"tuned", mb_tune}};
      if (mb_alpha0) {
        const rarebound::Alpha0Result a0 = rarebound::alpha0_search(
            record.gamma, m, record.prob_region, record.c_kappa);
        record.alpha = record.beta = a0.alpha0;
        record.bound = a0.bound;
        record.level = 1.0 - 2.0 * a0.alpha0;
      } else {
        const rarebound::BoundReport rep = rarebound::mbis_bound(
            record.gamma, m, record.prob_region, record.c_kappa, alpha, beta);
        record.alpha = alpha;
        record.beta = beta;
        record.bound = rep.bound;
        record.level = rep.level;
      }
      emit_json(record.to_json(), mb_out);
    } else if (sc_classify->parsed()) {
      rarebound::BudgetedObjective obj = cfg.make_objective();
      const rarebound::Classification cls =
          rarebound::classify_point(obj, cfg, cfg.seed);
      emit_json(cls.to_json(), cl_out);
    } else if (sc_study->parsed()) {
      const rarebound::StudyResult res =
          rarebound::run_toy_study(cfg, st_reps, cfg.seed);
      const std::string jpath = out_path(cfg, "study.json");
      const std::string cpath = out_path(cfg, "study.csv");
      {
        std::ofstream f(cpath);
        if (!f) throw rarebound::IoError("cannot open: " + cpath);
        f << res.csv();
      }
      emit_json(res.to_json(), jpath);
      std::cout << cpath << std::endl;
    } else if (sc_oracle->parsed()) {
      const rarebound::OracleEstimate est = rarebound::oracle_pi(
          rarebound::InputDistribution::uniform_on_box(rarebound::toy_box()),
          or_rho, or_m, cfg.seed);
      emit_json({{"schema_version", rarebound::kReportSchemaVersion},
                 {"label", "ORACLE"},
                 {"pi", est.p},
                 {"se", est.se},
                 {"mc_samples", est.mc_samples},
                 {"rho", or_rho},
                 {"seed", cfg.seed}},
                or_out);
    }
  } catch (const rarebound::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 4;
  }
  return 0;
}
