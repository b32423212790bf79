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

// Scalar reference kernels. These are the ground truth the vector variants
// are equivalence-tested against; they call straight into libm.

#include <cmath>
#include <cstddef>

#include "kernels_internal.hpp"

namespace rarebound::simd::scalar_impl {

void exp_array(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void norm_cdf_array(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 0.5 * std::erfc(-x[i] * 0.7071067811865475244);
}

void sq_exp_corr_row(const double* pts, std::size_t n, std::size_t d,
                     const double* q, const double* theta, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = q[j] - pts[j * n + i];
      acc += theta[j] * diff * diff;
    }
    out[i] = std::exp(-acc);
  }
}

std::size_t count_less(const double* x, std::size_t n, double bound) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += x[i] < bound ? 1 : 0;
  return c;
}

const detail::KernelTable kTable = {
    &exp_array,
    &norm_cdf_array,
    &sq_exp_corr_row,
    &count_less,
};

}  // namespace rarebound::simd::scalar_impl
