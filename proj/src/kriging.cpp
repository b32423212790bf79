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

#include "rarebound/kriging.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "parallel.hpp"
#include "rarebound/rng.hpp"
#include "rarebound/simd.hpp"

namespace rarebound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// R_ij = exp(-sum_k theta_k (x_ik - x_jk)^2), built row-wise with the
/// correlation kernel (points are column-major in Eigen by default).
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& pts,
                                   const Eigen::VectorXd& theta_full) {
  const auto n = pts.rows();
  const auto d = pts.cols();
  Eigen::MatrixXd R(n, n);
  Eigen::VectorXd q(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    q = pts.row(i);
    simd::sq_exp_corr_row(pts.data(), static_cast<std::size_t>(n),
                          static_cast<std::size_t>(d), q.data(),
                          theta_full.data(), R.col(i).data());
  }
  // enforce exact symmetry and unit diagonal
  for (Eigen::Index i = 0; i < n; ++i) {
    R(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) R(j, i) = R(i, j);
  }
  return R;
}

struct ConcentratedFit {
  bool ok = false;
  double nll = kInf;
  double sigma2 = 0.0;
  double jitter = 0.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd L;  // chol factor (only kept for the final rebuild)
};

/// Cholesky with the jitter ladder: 1e-10 escalating x10 up to 1e-4 on the
/// unit-diagonal correlation matrix.
bool chol_with_jitter(const Eigen::MatrixXd& R, double jitter_initial,
                      double jitter_max, Eigen::MatrixXd& L, double& jitter) {
  for (double jit = jitter_initial; jit <= jitter_max * (1.0 + 1e-12); jit *= 10.0) {
    Eigen::MatrixXd A = R;
    A.diagonal().array() += jit;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      L = llt.matrixL();
      jitter = jit;
      return true;
    }
  }
  return false;
}

ConcentratedFit concentrated_fit(const Eigen::MatrixXd& pts,
                                 const Eigen::VectorXd& y,
                                 const Eigen::MatrixXd& H,
                                 const Eigen::VectorXd& theta_full,
                                 double jitter_initial, double jitter_max) {
  ConcentratedFit out;
  const auto n = pts.rows();
  const Eigen::MatrixXd R = correlation_matrix(pts, theta_full);
  Eigen::MatrixXd L;
  double jitter = 0.0;
  if (!chol_with_jitter(R, jitter_initial, jitter_max, L, jitter)) return out;

  const auto Ltri = L.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd LiH = Ltri.solve(H);
  const Eigen::VectorXd Liy = Ltri.solve(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(LiH);
  const Eigen::VectorXd beta = qr.solve(Liy);
  const Eigen::VectorXd resid = Liy - LiH * beta;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(n);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(L(i, i));
  logdet *= 2.0;

  out.ok = true;
  out.sigma2 = sigma2;
  out.jitter = jitter;
  out.beta = beta;
  out.L = std::move(L);
  const double guarded = std::max(sigma2, 1e-312);
  out.nll = 0.5 * (static_cast<double>(n) * std::log(guarded) + logdet);
  return out;
}

/// Nelder-Mead on a box-clamped objective (used for anisotropic theta).
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& start, double step,
                            int max_evals) {
  const int m = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(m + 1, start);
  std::vector<double> val(m + 1);
  for (int j = 0; j < m; ++j) simplex[j + 1][j] += step;
  int evals = 0;
  for (int j = 0; j <= m; ++j) val[j] = (++evals, f(simplex[j]));

  auto order = [&] {
    for (int i = 0; i <= m; ++i)
      for (int j = i + 1; j <= m; ++j)
        if (val[j] < val[i]) {
          std::swap(val[i], val[j]);
          std::swap(simplex[i], simplex[j]);
        }
  };
  order();
  while (evals < max_evals) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < m; ++j) centroid += simplex[j];
    centroid /= m;
    const Eigen::VectorXd refl = centroid + (centroid - simplex[m]);
    const double fr = (++evals, f(refl));
    if (fr < val[0]) {
      const Eigen::VectorXd expd = centroid + 2.0 * (centroid - simplex[m]);
      const double fe = (++evals, f(expd));
      if (fe < fr) {
        simplex[m] = expd;
        val[m] = fe;
      } else {
        simplex[m] = refl;
        val[m] = fr;
      }
    } else if (fr < val[m - 1]) {
      simplex[m] = refl;
      val[m] = fr;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (simplex[m] - centroid);
      const double fc = (++evals, f(contr));
      if (fc < val[m]) {
        simplex[m] = contr;
        val[m] = fc;
      } else {
        for (int j = 1; j <= m; ++j) {
          simplex[j] = simplex[0] + 0.5 * (simplex[j] - simplex[0]);
          val[j] = (++evals, f(simplex[j]));
        }
      }
    }
    order();
    if (std::abs(val[m] - val[0]) < 1e-10 * (1.0 + std::abs(val[0]))) break;
  }
  return simplex[0];
}

}  // namespace

// ---- KernelSpec / TrendSpec -------------------------------------------------

KernelSpec KernelSpec::isotropic(double theta_value) {
  if (!(theta_value > 0.0)) throw PreconditionError("theta must be positive");
  KernelSpec k;
  k.theta = Eigen::VectorXd::Constant(1, theta_value);
  return k;
}

KernelSpec KernelSpec::anisotropic(Eigen::VectorXd theta_vector) {
  if (theta_vector.size() < 1 || (theta_vector.array() <= 0.0).any())
    throw PreconditionError("theta must be positive componentwise");
  KernelSpec k;
  k.theta = std::move(theta_vector);
  return k;
}

Eigen::VectorXd KernelSpec::expanded(int d) const {
  if (theta.size() == d) return theta;
  if (theta.size() == 1) return Eigen::VectorXd::Constant(d, theta[0]);
  throw PreconditionError("theta size must be 1 or the dimension");
}

double KernelSpec::correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b) const {
  const Eigen::VectorXd th = expanded(static_cast<int>(a.size()));
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += th[j] * diff * diff;
  }
  return std::exp(-acc);
}

TrendSpec TrendSpec::from_name(const std::string& name) {
  if (name == "intercept") return intercept();
  if (name == "linear") return linear();
  throw PreconditionError("unknown trend: " + name);
}

const char* TrendSpec::name() const {
  return kind_ == Kind::intercept ? "intercept" : "linear";
}

void TrendSpec::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                         Eigen::Ref<Eigen::VectorXd> h) const {
  h[0] = 1.0;
  if (kind_ == Kind::linear) h.tail(x.size()) = x;
}

Eigen::MatrixXd TrendSpec::matrix(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd H(points.rows(), size(static_cast<int>(points.cols())));
  H.col(0).setOnes();
  if (kind_ == Kind::linear) H.rightCols(points.cols()) = points;
  return H;
}

// ---- GpModel ----------------------------------------------------------------

void GpModel::finalize() {
  const int n = design_.n();
  const auto& y = *design_.outputs;
  H_ = trend_.matrix(design_.points);
  theta_full_ = kernel_.expanded(dim());

  const Eigen::MatrixXd R = correlation_matrix(design_.points, theta_full_);
  Eigen::MatrixXd L;
  double jitter = 0.0;
  if (!chol_with_jitter(R, jitter_, jitter_max_hint_, L, jitter))
    throw SingularCovariance("correlation matrix not PD at max jitter");
  jitter_ = jitter;
  L_ = std::move(L);

  Eigen::MatrixXd A = R;
  A.diagonal().array() += jitter_;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  Rinv_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
  w_ = llt.solve(y - H_ * beta_);

  const double scale = 1.0 + y.squaredNorm() / std::max(1, n);
  if (sigma2_ <= 1e-20 * scale) {
    sigma2_ = 0.0;
    degenerate_ = true;
  }
}

GpModel GpModel::from_parameters(const Design& design, const TrendSpec& trend,
                                 const KernelSpec& kernel,
                                 const Eigen::VectorXd& beta, double sigma2,
                                 double jitter_initial, double jitter_max) {
  if (!design.has_outputs())
    throw PreconditionError("design must carry outputs");
  if (beta.size() != trend.size(design.dim()))
    throw PreconditionError("beta size does not match the trend basis");
  if (!(sigma2 >= 0.0)) throw PreconditionError("sigma2 must be >= 0");
  GpModel m;
  m.design_ = design;
  m.trend_ = trend;
  m.kernel_ = kernel;
  m.beta_ = beta;
  m.sigma2_ = sigma2;
  m.jitter_ = jitter_initial;
  m.jitter_max_hint_ = jitter_max;
  m.finalize();
  return m;
}

GpModel GpModel::fit(const Design& design, const TrendSpec& trend,
                     const FitConfig& config, std::uint64_t seed) {
  if (!design.has_outputs()) throw PreconditionError("design must carry outputs");
  const int n = design.n();
  const int d = design.dim();
  const int L = trend.size(d);
  if (n <= L)
    throw RankDeficientTrend("need n > L observations to estimate the trend");
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trend.matrix(design.points));
    if (qr.rank() < L)
      throw RankDeficientTrend("trend basis is rank deficient on the design");
  }
  if (!(config.theta_min > 0.0 && config.theta_max > config.theta_min))
    throw PreconditionError("bad theta search range");

  const Eigen::MatrixXd H = trend.matrix(design.points);
  const auto& y = *design.outputs;
  const int m = config.anisotropic ? d : 1;
  const double lo = std::log(config.theta_min), hi = std::log(config.theta_max);

  const auto eval_log_theta = [&](const Eigen::VectorXd& log_theta) {
    Eigen::VectorXd th(m);
    double penalty = 0.0;
    for (int j = 0; j < m; ++j) {
      const double clamped = std::min(std::max(log_theta[j], lo), hi);
      penalty += 1e4 * (log_theta[j] - clamped) * (log_theta[j] - clamped);
      th[j] = std::exp(clamped);
    }
    KernelSpec k;
    k.theta = th;
    const ConcentratedFit fit =
        concentrated_fit(design.points, y, H, k.expanded(d),
                         config.jitter_initial, config.jitter_max);
    return fit.ok ? fit.nll + penalty : kInf;
  };

  // Starting points: a deterministic log-grid (so a reasonable basin is
  // always visited) plus the seeded random multistarts.
  const int starts = std::max(1, config.multistarts);
  std::vector<Eigen::VectorXd> cand;
  const int grid_starts = 17;
  for (int gidx = 0; gidx < grid_starts; ++gidx) {
    const double t = lo + (hi - lo) * gidx / (grid_starts - 1);
    cand.push_back(Eigen::VectorXd::Constant(m, t));
  }
  for (int s = 0; s < starts; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    Eigen::VectorXd lt(m);
    for (int j = 0; j < m; ++j) lt[j] = rng.uniform(lo, hi);
    cand.push_back(lt);
  }
  std::vector<double> cand_nll(cand.size(), kInf);
  parallel_for(static_cast<std::int64_t>(cand.size()), config.threads,
               [&](std::int64_t s) { cand_nll[s] = eval_log_theta(cand[s]); });

  // Keep the best point ever evaluated; the polish can only improve on it.
  double best_nll = kInf;
  Eigen::VectorXd best_lt;
  for (std::size_t s = 0; s < cand.size(); ++s)
    if (cand_nll[s] < best_nll) {
      best_nll = cand_nll[s];
      best_lt = cand[s];
    }
  if (!std::isfinite(best_nll))
    throw SingularCovariance("no admissible theta candidate");

  const auto eval_tracked = [&](const Eigen::VectorXd& lt) {
    const double v = eval_log_theta(lt);
    if (v < best_nll) {
      best_nll = v;
      best_lt = lt;
    }
    return v;
  };

  if (m == 1) {
    // golden-section polish on log theta around the incumbent
    double a = std::max(lo, best_lt[0] - 1.2);
    double b = std::min(hi, best_lt[0] + 1.2);
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a), e = a + gr * (b - a);
    Eigen::VectorXd v(1);
    auto f1 = [&](double t) {
      v[0] = t;
      return eval_tracked(v);
    };
    double fc = f1(c), fe = f1(e);
    for (int it = 0; it < config.polish_iterations; ++it) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - gr * (b - a);
        fc = f1(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + gr * (b - a);
        fe = f1(e);
      }
    }
    f1(0.5 * (a + b));
  } else {
    nelder_mead(eval_tracked, best_lt, 0.4,
                std::max(64, config.polish_iterations * m));
  }

  Eigen::VectorXd theta_hat(m);
  for (int j = 0; j < m; ++j)
    theta_hat[j] = std::exp(std::min(std::max(best_lt[j], lo), hi));
  KernelSpec kernel;
  kernel.theta = theta_hat;

  const ConcentratedFit final_fit =
      concentrated_fit(design.points, y, H, kernel.expanded(d),
                       config.jitter_initial, config.jitter_max);
  if (!final_fit.ok)
    throw SingularCovariance("correlation matrix not PD at the selected theta");

  GpModel model;
  model.design_ = design;
  model.trend_ = trend;
  model.kernel_ = kernel;
  model.beta_ = final_fit.beta;
  model.sigma2_ = final_fit.sigma2;
  model.nll_ = final_fit.nll;
  model.jitter_ = config.jitter_initial;
  model.jitter_max_hint_ = config.jitter_max;
  model.finalize();
  return model;
}

void GpModel::correlation_row(const Eigen::Ref<const Eigen::VectorXd>& x,
                              Eigen::Ref<Eigen::VectorXd> k) const {
  Eigen::VectorXd q = x;  // contiguous copy
  simd::sq_exp_corr_row(design_.points.data(),
                        static_cast<std::size_t>(design_.n()),
                        static_cast<std::size_t>(dim()), q.data(),
                        theta_full_.data(), k.data());
}

double GpModel::posterior_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd k(n()), h(beta_.size());
  correlation_row(x, k);
  trend_.evaluate(x, h);
  return h.dot(beta_) + k.dot(w_);
}

double GpModel::posterior_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& x2) const {
  if (degenerate_) return 0.0;
  Eigen::VectorXd kx(n()), ky(n());
  correlation_row(x, kx);
  correlation_row(x2, ky);
  const auto Ltri = L_.triangularView<Eigen::Lower>();
  const Eigen::VectorXd vx = Ltri.solve(kx);
  const Eigen::VectorXd vy = Ltri.solve(ky);
  return sigma2_ * (kernel_.correlation(x, x2) - vx.dot(vy));
}

double GpModel::posterior_var(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (degenerate_) return 0.0;
  Eigen::VectorXd k(n());
  correlation_row(x, k);
  const auto Ltri = L_.triangularView<Eigen::Lower>();
  const Eigen::VectorXd v = Ltri.solve(k);
  const double var = sigma2_ * (1.0 - v.squaredNorm());
  return std::min(std::max(var, 0.0), sigma2_);
}

void GpModel::posterior_mean_var(const Eigen::MatrixXd& points,
                                 Eigen::VectorXd& mean,
                                 Eigen::VectorXd& var) const {
  const auto k = points.rows();
  const int nn = n();
  Eigen::MatrixXd K(k, nn);
  Eigen::VectorXd q(dim());
  for (Eigen::Index i = 0; i < k; ++i) {
    q = points.row(i);
    Eigen::VectorXd row(nn);
    simd::sq_exp_corr_row(design_.points.data(), static_cast<std::size_t>(nn),
                          static_cast<std::size_t>(dim()), q.data(),
                          theta_full_.data(), row.data());
    K.row(i) = row;
  }
  mean = K * w_ + trend_.matrix(points) * beta_;
  if (degenerate_) {
    var = Eigen::VectorXd::Zero(k);
    return;
  }
  const Eigen::MatrixXd W = K * Rinv_;
  var.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double q2 = W.row(i).dot(K.row(i));
    var[i] = std::min(std::max(sigma2_ * (1.0 - q2), 0.0), sigma2_);
  }
}

void GpModel::posterior_pair_cov(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b,
                                 Eigen::VectorXd& cov) const {
  if (a.rows() != b.rows())
    throw PreconditionError("paired chunks must have equal row counts");
  const auto k = a.rows();
  cov.resize(k);
  if (degenerate_) {
    cov.setZero();
    return;
  }
  const int nn = n();
  Eigen::MatrixXd Ka(k, nn), Kb(k, nn);
  Eigen::VectorXd q(dim()), row(nn);
  for (Eigen::Index i = 0; i < k; ++i) {
    q = a.row(i);
    simd::sq_exp_corr_row(design_.points.data(), static_cast<std::size_t>(nn),
                          static_cast<std::size_t>(dim()), q.data(),
                          theta_full_.data(), row.data());
    Ka.row(i) = row;
    q = b.row(i);
    simd::sq_exp_corr_row(design_.points.data(), static_cast<std::size_t>(nn),
                          static_cast<std::size_t>(dim()), q.data(),
                          theta_full_.data(), row.data());
    Kb.row(i) = row;
  }
  const Eigen::MatrixXd W = Ka * Rinv_;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double prior = kernel_.correlation(a.row(i), b.row(i));
    cov[i] = sigma2_ * (prior - W.row(i).dot(Kb.row(i)));
  }
}

LooReport GpModel::loo_residuals(LooScaling scaling) const {
  const int nn = n();
  const int L = static_cast<int>(beta_.size());
  if (nn < L + 2)
    throw DegenerateLeaveOut("need n >= L + 2 for leave-one-out");
  if (degenerate_)
    throw DegenerateLeaveOut("leave-one-out undefined for a degenerate model");

  // Virtual LOO for universal Kriging: with C = R^{-1} - G (H' G)^{-1} G',
  // G = R^{-1} H, the LOO errors are (C y)_i / C_ii and the LOO variances
  // sigma^2 / C_ii (trend re-estimated in each fold, theta fixed).
  const auto& y = *design_.outputs;
  const Eigen::MatrixXd G = Rinv_ * H_;
  const Eigen::MatrixXd M = H_.transpose() * G;
  const Eigen::MatrixXd C = Rinv_ - G * M.ldlt().solve(G.transpose());
  const Eigen::VectorXd Cy = C * y;

  LooReport report;
  report.scaling = scaling;
  report.standardized.resize(nn);
  int inside = 0;
  for (int i = 0; i < nn; ++i) {
    const double cii = C(i, i);
    if (!(cii > 0.0))
      throw DegenerateLeaveOut("non-positive leave-one-out variance");
    const double err = Cy[i] / cii;
    const double var_i = sigma2_ / cii;
    const double r = scaling == LooScaling::std_deviation
                         ? err / std::sqrt(var_i)
                         : err / var_i;
    report.standardized[i] = r;
    if (r >= -3.0 && r <= 3.0) ++inside;
  }
  report.fraction_in_band = static_cast<double>(inside) / nn;
  return report;
}

nlohmann::json GpModel::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (int i = 0; i < n(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < dim(); ++j) row.push_back(design_.points(i, j));
    pts.push_back(std::move(row));
  }
  return {{"schema_version", 1},
          {"type", "gp-model"},
          {"trend", trend_.name()},
          {"theta", std::vector<double>(kernel_.theta.data(),
                                        kernel_.theta.data() + kernel_.theta.size())},
          {"beta", std::vector<double>(beta_.data(), beta_.data() + beta_.size())},
          {"sigma2", sigma2_},
          {"jitter", jitter_},
          {"points", pts},
          {"y", std::vector<double>(design_.outputs->data(),
                                    design_.outputs->data() + n())}};
}

GpModel GpModel::from_json(const nlohmann::json& j) {
  if (!j.contains("schema_version"))
    throw IoError("model record lacks schema_version");
  Design design;
  const auto& pts = j.at("points");
  const int n = static_cast<int>(pts.size());
  if (n < 1) throw IoError("model record has no points");
  const int d = static_cast<int>(pts.front().size());
  design.points.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < d; ++jj) design.points(i, jj) = pts[i][jj].get<double>();
  const auto yv = j.at("y").get<std::vector<double>>();
  design.outputs = Eigen::Map<const Eigen::VectorXd>(yv.data(), n);

  const auto th = j.at("theta").get<std::vector<double>>();
  KernelSpec kernel;
  kernel.theta = Eigen::Map<const Eigen::VectorXd>(th.data(),
                                                   static_cast<int>(th.size()));
  const auto bv = j.at("beta").get<std::vector<double>>();
  const Eigen::VectorXd beta =
      Eigen::Map<const Eigen::VectorXd>(bv.data(), static_cast<int>(bv.size()));
  const double jitter = j.at("jitter").get<double>();
  // fixed jitter: the reload reproduces the saved factorization bit for bit
  return from_parameters(design, TrendSpec::from_name(j.at("trend")), kernel,
                         beta, j.at("sigma2").get<double>(), jitter, jitter);
}

void GpModel::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << to_json().dump(2) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

GpModel GpModel::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  nlohmann::json j;
  f >> j;
  return from_json(j);
}

// ---- grid repair and conditional simulation ---------------------------------

Design grid_repair(const Design& grid, const Design& design, const Box& box,
                   double dmin, std::uint64_t seed, int max_attempts) {
  if (!(dmin > 0.0)) throw PreconditionError("grid_repair needs dmin > 0");
  Rng rng(seed);
  const double dmin2 = dmin * dmin;
  Design out;
  out.points.resize(grid.n(), grid.dim());
  Eigen::VectorXd cand(grid.dim());
  for (int i = 0; i < grid.n(); ++i) {
    cand = grid.points.row(i);
    int attempts = 0;
    for (;;) {
      bool ok = true;
      for (int j = 0; j < design.n() && ok; ++j)
        ok = (cand - design.points.row(j).transpose()).squaredNorm() >= dmin2;
      for (int j = 0; j < i && ok; ++j)
        ok = (cand - out.points.row(j).transpose()).squaredNorm() >= dmin2;
      if (ok) break;
      if (++attempts > max_attempts)
        throw RepairFailure("could not place grid point " + std::to_string(i) +
                            " at dmin " + std::to_string(dmin));
      for (int j = 0; j < grid.dim(); ++j)
        cand[j] = rng.uniform(box.lower[j], box.upper[j]);
    }
    out.points.row(i) = cand;
  }
  return out;
}

ConditionalSimulation conditional_simulate(const GpModel& model,
                                           const Design& grid, int count,
                                           std::uint64_t seed) {
  if (count < 1) throw PreconditionError("need at least one realization");
  if (grid.n() < 1) throw PreconditionError("empty simulation grid");
  const int n = model.n();
  const int T = grid.n();
  const int d = model.dim();

  // posterior law on the grid
  Eigen::VectorXd mg, vg;
  model.posterior_mean_var(grid.points, mg, vg);
  const Eigen::VectorXd theta_full = model.kernel().expanded(d);
  Eigen::MatrixXd C(T, T);
  if (model.degenerate()) {
    C.setZero();
  } else {
    const Eigen::MatrixXd Rg = correlation_matrix(grid.points, theta_full);
    Eigen::MatrixXd Kg(T, n);
    Eigen::VectorXd q(d);
    for (int t = 0; t < T; ++t) {
      q = grid.points.row(t);
      Eigen::VectorXd row(n);
      simd::sq_exp_corr_row(model.design().points.data(),
                            static_cast<std::size_t>(n),
                            static_cast<std::size_t>(d), q.data(),
                            theta_full.data(), row.data());
      Kg.row(t) = row;
    }
    Eigen::MatrixXd A = correlation_matrix(model.design().points, theta_full);
    A.diagonal().array() += model.jitter();
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    const Eigen::MatrixXd V =
        llt.matrixL().solve(Eigen::MatrixXd(Kg.transpose()));
    C = model.sigma2() * (Rg - V.transpose() * V);
  }

  Eigen::MatrixXd Lc = Eigen::MatrixXd::Zero(T, T);
  if (!model.degenerate()) {
    const double scale = std::max(model.sigma2(), 1e-300);
    bool done = false;
    for (double jit = 1e-10; jit <= 1e-4 * (1.0 + 1e-12); jit *= 10.0) {
      Eigen::MatrixXd A = C;
      A.diagonal().array() += jit * scale;
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() == Eigen::Success) {
        Lc = llt.matrixL();
        done = true;
        break;
      }
    }
    if (!done)
      throw SingularCovariance("grid covariance not PD at max jitter");
  }

  ConditionalSimulation sim;
  sim.values_.resize(count, T);
  Eigen::VectorXd z(T);
  for (int r = 0; r < count; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (int t = 0; t < T; ++t) z[t] = rng.normal();
    sim.values_.row(r) = (mg + Lc * z).transpose();
  }

  // double conditioning: process conditioned on design data + grid draws
  sim.joint_pts_.resize(n + T, d);
  sim.joint_pts_.topRows(n) = model.design().points;
  sim.joint_pts_.bottomRows(T) = grid.points;
  sim.theta_full_ = theta_full;
  sim.beta_ = model.beta();
  sim.trend_ = model.trend();

  Eigen::MatrixXd RJ = correlation_matrix(sim.joint_pts_, theta_full);
  Eigen::MatrixXd LJ;
  double jitter = 0.0;
  if (!chol_with_jitter(RJ, model.jitter(), 1e-4, LJ, jitter))
    throw SingularCovariance("joint covariance not PD at max jitter");
  RJ.diagonal().array() += jitter;
  const Eigen::LLT<Eigen::MatrixXd> lltJ(RJ);

  const Eigen::MatrixXd HJ = model.trend().matrix(sim.joint_pts_);
  const Eigen::VectorXd trendJ = HJ * model.beta();
  Eigen::MatrixXd resid(n + T, count);
  const Eigen::VectorXd top = *model.design().outputs - trendJ.head(n);
  for (int r = 0; r < count; ++r) {
    resid.col(r).head(n) = top;
    resid.col(r).tail(T) = sim.values_.row(r).transpose() - trendJ.tail(T);
  }
  sim.weights_ = lltJ.solve(resid);
  return sim;
}

double ConditionalSimulation::evaluate(
    int realization, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto nj = joint_pts_.rows();
  Eigen::VectorXd k(nj), q = x;
  simd::sq_exp_corr_row(joint_pts_.data(), static_cast<std::size_t>(nj),
                        static_cast<std::size_t>(joint_pts_.cols()), q.data(),
                        theta_full_.data(), k.data());
  Eigen::VectorXd h(beta_.size());
  trend_.evaluate(x, h);
  return h.dot(beta_) + k.dot(weights_.col(realization));
}

void ConditionalSimulation::evaluate_all(const Eigen::MatrixXd& points,
                                         Eigen::MatrixXd& out) const {
  const auto k = points.rows();
  const auto nj = joint_pts_.rows();
  Eigen::MatrixXd K(k, nj);
  Eigen::VectorXd q(joint_pts_.cols());
  for (Eigen::Index i = 0; i < k; ++i) {
    q = points.row(i);
    Eigen::VectorXd row(nj);
    simd::sq_exp_corr_row(joint_pts_.data(), static_cast<std::size_t>(nj),
                          static_cast<std::size_t>(joint_pts_.cols()), q.data(),
                          theta_full_.data(), row.data());
    K.row(i) = row;
  }
  out.noalias() = K * weights_;
  const Eigen::VectorXd hb = trend_.matrix(points) * beta_;
  out.colwise() += hb;
}

}  // namespace rarebound
