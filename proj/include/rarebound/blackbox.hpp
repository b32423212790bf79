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
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rarebound/errors.hpp"
#include "rarebound/rng.hpp"

namespace rarebound {

/// Axis-aligned box domain.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static Box cube(double lo, double hi, int d);
  static Box unit(int d) { return cube(0.0, 1.0, d); }

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double diagonal() const { return (upper - lower).norm(); }
};

/// Input distribution P_X on a box: either uniform on the box or a product of
/// independent per-dimension marginals. Samples always land inside the box.
class InputDistribution {
 public:
  struct Marginal {
    enum class Kind { uniform, truncated_normal };
    Kind kind = Kind::uniform;
    double mu = 0.0;     // truncated_normal only
    double sigma = 1.0;  // truncated_normal only
  };

  static InputDistribution uniform_on_box(const Box& box);
  static InputDistribution independent_marginals(const Box& box,
                                                 std::vector<Marginal> marginals);

  const Box& box() const { return box_; }
  int dim() const { return box_.dim(); }
  bool is_uniform() const { return marginals_.empty(); }

  void sample(Rng& rng, Eigen::Ref<Eigen::VectorXd> out) const;
  /// count x d matrix of i.i.d. draws.
  Eigen::MatrixXd sample_matrix(Rng& rng, Eigen::Index count) const;
  /// Log density up to an additive constant; -inf outside the box.
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  Box box_;
  std::vector<Marginal> marginals_;  // empty = uniform on box
};

/// A black-box function with a hard call budget. The budget counter is the
/// only shared mutable state; slots are reserved atomically so that the
/// total-call contract holds even under concurrent evaluation. A failed
/// underlying evaluation still consumes its reserved slot: the expensive call
/// was made.
class BudgetedObjective {
 public:
  using Evaluator = std::function<double(const Eigen::VectorXd&)>;

  BudgetedObjective(Evaluator evaluator, Box domain, std::uint64_t budget_total);
  BudgetedObjective(BudgetedObjective&& other) noexcept;

  /// Evaluate f(x). Throws BudgetExhausted, DomainViolation or EvalFailure.
  double eval(const Eigen::Ref<const Eigen::VectorXd>& x);

  const Box& domain() const { return domain_; }
  std::uint64_t budget_total() const { return total_; }
  std::uint64_t budget_used() const { return used_.load(); }
  std::uint64_t budget_remaining() const { return total_ - budget_used(); }

 private:
  Evaluator evaluator_;
  Box domain_;
  std::uint64_t total_;
  std::atomic<std::uint64_t> used_{0};
};

/// sin(t)/t with the continuous extension at 0 (Taylor branch below 1e-6 to
/// avoid cancellation).
double sinc(double t);

/// The two-dimensional test function on [-10,10]^2:
///   f(x1,x2) = -sin(x1)/x1 - sin(x2+2)/(x2+2) + 2
double toy_f(double x1, double x2);

/// Vectorized toy evaluation for Monte Carlo oracles (no budget involved).
void toy_f_batch(const Eigen::Ref<const Eigen::MatrixXd>& points,
                 Eigen::Ref<Eigen::VectorXd> out);

Box toy_box();  // [-10, 10]^2
BudgetedObjective make_toy_objective(std::uint64_t budget);

/// Configuration for the line-protocol external evaluator. The command is
/// started once via /bin/sh -c; each evaluation writes one line of
/// space-separated coordinates to its stdin and reads back one line with the
/// response value. A nonzero exit or malformed response raises ProcessFailure;
/// exceeding timeout_sec raises Timeout.
struct ExternalProcessConfig {
  std::string command;
  double timeout_sec = 30.0;
};

BudgetedObjective make_external_objective(const ExternalProcessConfig& config,
                                          Box domain, std::uint64_t budget);

}  // namespace rarebound
