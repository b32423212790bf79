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
#include <optional>
#include <string>
#include <vector>

#include "rarebound/blackbox.hpp"

namespace rarebound {

class GpModel;  // kriging.hpp

/// An ordered set of input points, optionally with their evaluated outputs.
struct Design {
  Eigen::MatrixXd points;  // n x d
  std::optional<Eigen::VectorXd> outputs;

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool has_outputs() const { return outputs.has_value(); }
  double min_pairwise_distance() const;
};

/// Latin hypercube in the unit cube: each dimension's n coordinates occupy
/// the n strata [k/n, (k+1)/n), one per stratum. Deterministic in (n, d, seed).
Design lhs(int n, int d, std::uint64_t seed);

struct AnnealSchedule {
  double initial_temp = 0.05;
  double cooling = 0.999;  // geometric
};

/// Simulated-annealing maximin improvement. Moves swap two entries within one
/// random column, preserving the Latin property; the best design seen is
/// returned, so the output min-distance never drops below the input's.
Design maximin_anneal(const Design& start, int iterations,
                      const AnnealSchedule& schedule, std::uint64_t seed);

/// Affine map of unit-cube points onto a box (per dimension).
Design scale_to_box(const Design& design, const Box& box);
/// Inverse of scale_to_box.
Design scale_to_unit(const Design& design, const Box& box);

/// Picks the candidate maximizing Phi(-|rho - m(x)| / s(x)), a posterior
/// misclassification-probability proxy for augmenting a design near the
/// threshold. Not the tIMSE/SUR criteria from the sequential-design
/// literature; reports label this criterion "misclassification-proxy".
/// Ties break toward the lowest index. Throws DegenerateModel if every
/// candidate has zero posterior variance.
Eigen::VectorXd sequential_augment(const GpModel& model, double rho,
                                   const Eigen::MatrixXd& candidates);

/// CSV: header x1..xd[,y], one point per row, 17 significant digits.
void save_design_csv(const Design& design, const std::string& path);
Design load_design_csv(const std::string& path);

}  // namespace rarebound
