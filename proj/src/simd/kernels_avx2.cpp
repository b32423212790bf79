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

// AVX2 + FMA backend. This translation unit is the only one compiled with
// -mavx2 -mfma; it must not be entered unless the CPU supports both (the
// dispatcher checks at startup).

#include <immintrin.h>

#include <cstddef>

#include "kernels_internal.hpp"
#include "vec_kernels.hpp"

namespace rarebound::simd {
namespace {

struct VecAvx2 {
  using reg = __m256d;
  static constexpr std::size_t width = 4;

  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg div(reg a, reg b) { return _mm256_div_pd(a, b); }
  static reg fma(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg fnma(reg a, reg b, reg c) { return _mm256_fnmadd_pd(a, b, c); }
  static reg min(reg a, reg b) { return _mm256_min_pd(a, b); }
  static reg max(reg a, reg b) { return _mm256_max_pd(a, b); }
  static reg abs(reg a) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a);
  }
  static reg neg(reg a) { return _mm256_xor_pd(a, _mm256_set1_pd(-0.0)); }
  static reg round_nearest(reg a) {
    return _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  }
  static reg trunc(reg a) {
    return _mm256_round_pd(a, _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
  }
  static reg cmp_lt(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
  static reg cmp_le(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
  static reg select(reg mask, reg a, reg b) {
    return _mm256_blendv_pd(b, a, mask);
  }
  static int count_lt(reg a, reg b) {
    return __builtin_popcount(_mm256_movemask_pd(cmp_lt(a, b)));
  }
  // x * 2^k, k integral-valued doubles; scales in two halves so that
  // subnormal results are reached by ordinary multiplication.
  static reg ldexp2(reg x, reg k) {
    const __m128i ki = _mm256_cvtpd_epi32(k);
    const __m128i k1 = _mm_srai_epi32(ki, 1);
    const __m128i k2 = _mm_sub_epi32(ki, k1);
    return mul(mul(x, pow2(k1)), pow2(k2));
  }

 private:
  static reg pow2(__m128i e32) {
    __m256i e = _mm256_cvtepi32_epi64(e32);
    e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
    e = _mm256_slli_epi64(e, 52);
    return _mm256_castsi256_pd(e);
  }
};

void avx2_exp_array(const double* x, double* y, std::size_t n) {
  exp_array_t<VecAvx2>(x, y, n);
}
void avx2_norm_cdf_array(const double* x, double* y, std::size_t n) {
  norm_cdf_array_t<VecAvx2>(x, y, n);
}
void avx2_sq_exp_corr_row(const double* pts, std::size_t n, std::size_t d,
                     const double* q, const double* theta, double* out) {
  sq_exp_corr_row_t<VecAvx2>(pts, n, d, q, theta, out);
}
std::size_t avx2_count_less(const double* x, std::size_t n, double bound) {
  return count_less_t<VecAvx2>(x, n, bound);
}

}  // namespace

namespace avx2_impl {
const detail::KernelTable kTable = {
    &avx2_exp_array,
    &avx2_norm_cdf_array,
    &avx2_sq_exp_corr_row,
    &avx2_count_less,
};
}  // namespace avx2_impl

}  // namespace rarebound::simd
