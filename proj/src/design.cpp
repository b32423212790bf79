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

#include "rarebound/design.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rarebound/kriging.hpp"
#include "rarebound/normal.hpp"
#include "rarebound/rng.hpp"

namespace rarebound {

double Design::min_pairwise_distance() const {
  const int m = n();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
  return std::sqrt(best);
}

Design lhs(int n, int d, std::uint64_t seed) {
  if (n < 2) throw PreconditionError("lhs needs n >= 2");
  if (d < 1) throw PreconditionError("lhs needs d >= 1");
  Rng rng(seed);
  Design design;
  design.points.resize(n, d);
  std::vector<int> perm(n);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (int i = 0; i < n; ++i)
      design.points(i, j) = (perm[i] + rng.uniform()) / n;
  }
  return design;
}

namespace {

/// Pairwise squared-distance table kept incrementally up to date.
struct DistTable {
  explicit DistTable(const Eigen::MatrixXd& pts) : d2(pts.rows(), pts.rows()) {
    const int n = static_cast<int>(pts.rows());
    for (int i = 0; i < n; ++i) {
      d2(i, i) = std::numeric_limits<double>::infinity();
      for (int j = i + 1; j < n; ++j)
        d2(i, j) = d2(j, i) = (pts.row(i) - pts.row(j)).squaredNorm();
    }
  }
  void update_row(const Eigen::MatrixXd& pts, int r) {
    const int n = static_cast<int>(pts.rows());
    for (int j = 0; j < n; ++j) {
      if (j == r) continue;
      d2(r, j) = d2(j, r) = (pts.row(r) - pts.row(j)).squaredNorm();
    }
  }
  double min() const { return d2.minCoeff(); }
  Eigen::MatrixXd d2;
};

}  // namespace

Design maximin_anneal(const Design& start, int iterations,
                      const AnnealSchedule& schedule, std::uint64_t seed) {
  if (iterations < 0) throw PreconditionError("iterations must be >= 0");
  const int n = start.n(), d = start.dim();
  if (iterations == 0 || n < 2) return start;

  Rng rng(seed);
  Eigen::MatrixXd cur = start.points;
  DistTable table(cur);
  double cur_min = table.min();
  Eigen::MatrixXd best = cur;
  double best_min = cur_min;
  double temp = schedule.initial_temp;

  for (int it = 0; it < iterations; ++it) {
    const int col = static_cast<int>(rng.below(d));
    const int a = static_cast<int>(rng.below(n));
    int b = static_cast<int>(rng.below(n - 1));
    if (b >= a) ++b;

    std::swap(cur(a, col), cur(b, col));
    table.update_row(cur, a);
    table.update_row(cur, b);
    const double cand_min = table.min();

    const double delta = cand_min - cur_min;
    bool accept = delta > 0.0;
    if (!accept && temp > 0.0) accept = rng.uniform() < std::exp(delta / temp);
    if (accept) {
      cur_min = cand_min;
      if (cur_min > best_min) {
        best_min = cur_min;
        best = cur;
      }
    } else {
      std::swap(cur(a, col), cur(b, col));
      table.update_row(cur, a);
      table.update_row(cur, b);
    }
    temp *= schedule.cooling;
  }

  Design out;
  out.points = std::move(best);
  out.outputs = start.outputs;  // typically absent at this stage
  return out;
}

Design scale_to_box(const Design& design, const Box& box) {
  if (design.dim() != box.dim())
    throw PreconditionError("design and box dimension mismatch");
  Design out = design;
  for (int j = 0; j < box.dim(); ++j)
    out.points.col(j) =
        (box.lower[j] +
         design.points.col(j).array() * (box.upper[j] - box.lower[j]))
            .matrix();
  return out;
}

Design scale_to_unit(const Design& design, const Box& box) {
  if (design.dim() != box.dim())
    throw PreconditionError("design and box dimension mismatch");
  Design out = design;
  for (int j = 0; j < box.dim(); ++j)
    out.points.col(j) = ((design.points.col(j).array() - box.lower[j]) /
                         (box.upper[j] - box.lower[j]))
                            .matrix();
  return out;
}

Eigen::VectorXd sequential_augment(const GpModel& model, double rho,
                                   const Eigen::MatrixXd& candidates) {
  if (candidates.rows() < 1)
    throw PreconditionError("sequential_augment needs candidates");
  Eigen::VectorXd mean, var;
  model.posterior_mean_var(candidates, mean, var);
  // variance at jitter scale means the point is already interpolated
  const double var_floor = 1e-8 * model.sigma2();
  double best_score = -1.0;
  Eigen::Index best_idx = -1;
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    if (var[i] <= var_floor) continue;
    const double s = std::sqrt(var[i]);
    const double score = norm_cdf(-std::abs(rho - mean[i]) / s);
    if (score > best_score) {
      best_score = score;
      best_idx = i;
    }
  }
  if (best_idx < 0)
    throw DegenerateModel("all candidates have zero posterior variance");
  return candidates.row(best_idx);
}

void save_design_csv(const Design& design, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.precision(17);
  for (int j = 0; j < design.dim(); ++j) f << (j ? ",x" : "x") << (j + 1);
  if (design.has_outputs()) f << ",y";
  f << '\n';
  for (int i = 0; i < design.n(); ++i) {
    for (int j = 0; j < design.dim(); ++j)
      f << (j ? "," : "") << design.points(i, j);
    if (design.has_outputs()) f << ',' << (*design.outputs)[i];
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

Design load_design_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty design file: " + path);
  const bool has_y = line.size() >= 2 && line.substr(line.size() - 2) == ",y";
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("design file has no points: " + path);
  const auto cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw IoError("ragged design file: " + path);
  const int d = static_cast<int>(cols) - (has_y ? 1 : 0);
  if (d < 1) throw IoError("design file has no coordinates: " + path);
  Design design;
  design.points.resize(static_cast<int>(rows.size()), d);
  if (has_y) design.outputs = Eigen::VectorXd(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) design.points(static_cast<int>(i), j) = rows[i][j];
    if (has_y) (*design.outputs)[static_cast<int>(i)] = rows[i][cols - 1];
  }
  return design;
}

}  // namespace rarebound
