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

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "rarebound/design.hpp"

namespace rarebound {

/// Squared-exponential correlation K(x,x') = exp(-sum_j theta_j (x_j-x'_j)^2).
/// theta has one entry (isotropic) or one per dimension.
struct KernelSpec {
  Eigen::VectorXd theta;

  static KernelSpec isotropic(double theta_value);
  static KernelSpec anisotropic(Eigen::VectorXd theta_vector);
  bool is_isotropic() const { return theta.size() == 1; }
  Eigen::VectorXd expanded(int d) const;
  double correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b) const;
};

/// Regression basis for the trend part of the model.
class TrendSpec {
 public:
  enum class Kind { intercept, linear };

  static TrendSpec intercept() { return TrendSpec(Kind::intercept); }
  static TrendSpec linear() { return TrendSpec(Kind::linear); }
  static TrendSpec from_name(const std::string& name);

  Kind kind() const { return kind_; }
  const char* name() const;
  int size(int d) const { return kind_ == Kind::intercept ? 1 : 1 + d; }
  void evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                Eigen::Ref<Eigen::VectorXd> h) const;
  Eigen::MatrixXd matrix(const Eigen::MatrixXd& points) const;

 private:
  explicit TrendSpec(Kind kind) : kind_(kind) {}
  Kind kind_;
};

struct FitConfig {
  int multistarts = 10;
  double theta_min = 1e-3;
  double theta_max = 1e3;
  bool anisotropic = false;
  int polish_iterations = 48;
  double jitter_initial = 1e-10;
  double jitter_max = 1e-4;
  int threads = 1;
};

enum class LooScaling {
  std_deviation,  // e_i / sigma_{-i}(x_i): matches the [-3,3] band reading
  variance,       // e_i / sigma^2_{-i}(x_i): the literal formula
};

struct LooReport {
  Eigen::VectorXd standardized;  // signed residuals, length n
  double fraction_in_band = 0.0;  // fraction inside [-3, 3]
  LooScaling scaling = LooScaling::std_deviation;
};

/// Universal Kriging metamodel with plug-in maximum-likelihood parameters.
/// Immutable once constructed; posterior queries are thread-safe.
class GpModel {
 public:
  /// Maximum-likelihood fit: beta and sigma^2 are profiled out analytically
  /// (generalized least squares), theta maximizes the concentrated
  /// log-likelihood over a log-uniform multistart search with a
  /// derivative-free polish.
  static GpModel fit(const Design& design, const TrendSpec& trend,
                     const FitConfig& config, std::uint64_t seed);

  /// Conditioning with all parameters fixed (no estimation).
  static GpModel from_parameters(const Design& design, const TrendSpec& trend,
                                 const KernelSpec& kernel,
                                 const Eigen::VectorXd& beta, double sigma2,
                                 double jitter_initial = 1e-10,
                                 double jitter_max = 1e-4);

  double posterior_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double posterior_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& x2) const;
  /// posterior_cov(x,x) clamped into [0, sigma2].
  double posterior_var(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Batch mean/variance for Monte Carlo chunks (kernel rows + GEMM).
  void posterior_mean_var(const Eigen::MatrixXd& points, Eigen::VectorXd& mean,
                          Eigen::VectorXd& var) const;
  /// cov(a_i, b_i) for paired rows of two equally sized point chunks.
  void posterior_pair_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                          Eigen::VectorXd& cov) const;

  /// Leave-one-out residuals by the virtual cross-validation identities with
  /// theta fixed at its estimate (an approximation to n full refits).
  LooReport loo_residuals(LooScaling scaling = LooScaling::std_deviation) const;

  const Design& design() const { return design_; }
  const TrendSpec& trend() const { return trend_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  double sigma2() const { return sigma2_; }
  double jitter() const { return jitter_; }
  bool degenerate() const { return degenerate_; }
  int n() const { return design_.n(); }
  int dim() const { return design_.dim(); }
  double fit_nll() const { return nll_; }

  void correlation_row(const Eigen::Ref<const Eigen::VectorXd>& x,
                       Eigen::Ref<Eigen::VectorXd> k) const;

  nlohmann::json to_json() const;
  static GpModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static GpModel load(const std::string& path);

 private:
  GpModel() : trend_(TrendSpec::intercept()) {}
  void finalize();  // builds chol, weights, inverse

  Design design_;
  TrendSpec trend_;
  KernelSpec kernel_;
  Eigen::VectorXd theta_full_;
  Eigen::VectorXd beta_;
  double sigma2_ = 0.0;
  double jitter_ = 0.0;
  double jitter_max_hint_ = 1e-4;
  double nll_ = 0.0;
  bool degenerate_ = false;
  Eigen::MatrixXd L_;        // chol of R + jitter I
  Eigen::MatrixXd Rinv_;
  Eigen::VectorXd w_;        // R^{-1} (y - H beta)
  Eigen::MatrixXd H_;
};

/// Replaces grid points closer than dmin to the design or to already accepted
/// grid points with uniform redraws in the box. Throws RepairFailure when a
/// point cannot be placed within max_attempts redraws.
Design grid_repair(const Design& grid, const Design& design, const Box& box,
                   double dmin, std::uint64_t seed, int max_attempts = 10000);

/// Joint draws of the posterior process on a grid plus the double-conditioned
/// mean surfaces approximating each realization everywhere.
class ConditionalSimulation {
 public:
  const Eigen::MatrixXd& grid_values() const { return values_; }
  int count() const { return static_cast<int>(values_.rows()); }
  int grid_size() const { return static_cast<int>(values_.cols()); }

  /// Mean of the process conditioned on both the design data and realization
  /// r's grid values, evaluated at x.
  double evaluate(int realization, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// All realizations at once for a chunk of points: out is points.rows() x count.
  void evaluate_all(const Eigen::MatrixXd& points, Eigen::MatrixXd& out) const;

 private:
  friend ConditionalSimulation conditional_simulate(const GpModel&, const Design&,
                                                    int, std::uint64_t);
  Eigen::MatrixXd values_;     // count x T
  Eigen::MatrixXd joint_pts_;  // (n+T) x d
  Eigen::MatrixXd weights_;    // (n+T) x count
  Eigen::VectorXd theta_full_;
  Eigen::VectorXd beta_;
  TrendSpec trend_ = TrendSpec::intercept();
};

ConditionalSimulation conditional_simulate(const GpModel& model,
                                           const Design& grid, int count,
                                           std::uint64_t seed);

}  // namespace rarebound
