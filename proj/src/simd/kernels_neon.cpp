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

// AArch64 NEON backend (two double lanes). Shares the kernel bodies with the
// AVX2 backend through vec_kernels.hpp.

#include <arm_neon.h>

#include <cstddef>

#include "kernels_internal.hpp"
#include "vec_kernels.hpp"

namespace rarebound::simd {
namespace {

struct VecNeon {
  using reg = float64x2_t;
  static constexpr std::size_t width = 2;

  static reg load(const double* p) { return vld1q_f64(p); }
  static void store(double* p, reg v) { vst1q_f64(p, v); }
  static reg set1(double v) { return vdupq_n_f64(v); }
  static reg add(reg a, reg b) { return vaddq_f64(a, b); }
  static reg sub(reg a, reg b) { return vsubq_f64(a, b); }
  static reg mul(reg a, reg b) { return vmulq_f64(a, b); }
  static reg div(reg a, reg b) { return vdivq_f64(a, b); }
  static reg fma(reg a, reg b, reg c) { return vfmaq_f64(c, a, b); }
  static reg fnma(reg a, reg b, reg c) { return vfmsq_f64(c, a, b); }
  static reg min(reg a, reg b) { return vminq_f64(a, b); }
  static reg max(reg a, reg b) { return vmaxq_f64(a, b); }
  static reg abs(reg a) { return vabsq_f64(a); }
  static reg neg(reg a) { return vnegq_f64(a); }
  static reg round_nearest(reg a) { return vrndnq_f64(a); }
  static reg trunc(reg a) { return vrndq_f64(a); }
  static reg cmp_lt(reg a, reg b) {
    return vreinterpretq_f64_u64(vcltq_f64(a, b));
  }
  static reg cmp_le(reg a, reg b) {
    return vreinterpretq_f64_u64(vcleq_f64(a, b));
  }
  static reg select(reg mask, reg a, reg b) {
    return vbslq_f64(vreinterpretq_u64_f64(mask), a, b);
  }
  static int count_lt(reg a, reg b) {
    const uint64x2_t m = vcltq_f64(a, b);
    return static_cast<int>((vgetq_lane_u64(m, 0) & 1u) +
                            (vgetq_lane_u64(m, 1) & 1u));
  }
  static reg ldexp2(reg x, reg k) {
    const int64x2_t ki = vcvtnq_s64_f64(k);
    const int64x2_t k1 = vshrq_n_s64(ki, 1);
    const int64x2_t k2 = vsubq_s64(ki, k1);
    return mul(mul(x, pow2(k1)), pow2(k2));
  }

 private:
  static reg pow2(int64x2_t e) {
    e = vaddq_s64(e, vdupq_n_s64(1023));
    e = vshlq_n_s64(e, 52);
    return vreinterpretq_f64_s64(e);
  }
};

void neon_exp_array(const double* x, double* y, std::size_t n) {
  exp_array_t<VecNeon>(x, y, n);
}
void neon_norm_cdf_array(const double* x, double* y, std::size_t n) {
  norm_cdf_array_t<VecNeon>(x, y, n);
}
void neon_sq_exp_corr_row(const double* pts, std::size_t n, std::size_t d,
                     const double* q, const double* theta, double* out) {
  sq_exp_corr_row_t<VecNeon>(pts, n, d, q, theta, out);
}
std::size_t neon_count_less(const double* x, std::size_t n, double bound) {
  return count_less_t<VecNeon>(x, n, bound);
}

}  // namespace

namespace neon_impl {
const detail::KernelTable kTable = {
    &neon_exp_array,
    &neon_norm_cdf_array,
    &neon_sq_exp_corr_row,
    &neon_count_less,
};
}  // namespace neon_impl

}  // namespace rarebound::simd
