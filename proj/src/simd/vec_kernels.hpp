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

// Width-agnostic kernel bodies. Each vector backend (AVX2, NEON) supplies a
// small wrapper type V with the lane operations; the math lives here once.
//
// exp: range reduction against ln2 split in two parts, degree-13 polynomial,
// two-step exponent scaling so subnormal results degrade gracefully.
//
// erfc: Cody's three-range rational approximations with the split
// exp(-w*w) = exp(-ws*ws) * exp(-(w-ws)*(w+ws)), ws = trunc(16w)/16, which
// keeps full relative accuracy in the tail.

#pragma once

#include <cstddef>
#include <cstring>

namespace rarebound::simd {

template <class V>
inline typename V::reg exp_core(typename V::reg x) {
  using R = typename V::reg;
  const R ln2_hi = V::set1(6.93147180369123816490e-01);
  const R ln2_lo = V::set1(1.90821492927058770002e-10);
  const R inv_ln2 = V::set1(1.44269504088896338700e+00);

  x = V::max(V::set1(-745.5), V::min(V::set1(710.0), x));
  const R k = V::round_nearest(V::mul(x, inv_ln2));
  R r = V::fnma(k, ln2_hi, x);
  r = V::fnma(k, ln2_lo, r);

  R p = V::set1(1.6059043836821613e-10);        // 1/13!
  p = V::fma(p, r, V::set1(2.0876756987868099e-09));  // 1/12!
  p = V::fma(p, r, V::set1(2.5052108385441719e-08));  // 1/11!
  p = V::fma(p, r, V::set1(2.7557319223985893e-07));  // 1/10!
  p = V::fma(p, r, V::set1(2.7557319223985888e-06));  // 1/9!
  p = V::fma(p, r, V::set1(2.4801587301587302e-05));  // 1/8!
  p = V::fma(p, r, V::set1(1.9841269841269841e-04));  // 1/7!
  p = V::fma(p, r, V::set1(1.3888888888888889e-03));  // 1/6!
  p = V::fma(p, r, V::set1(8.3333333333333333e-03));  // 1/5!
  p = V::fma(p, r, V::set1(4.1666666666666666e-02));  // 1/4!
  p = V::fma(p, r, V::set1(1.6666666666666667e-01));  // 1/3!
  p = V::fma(p, r, V::set1(0.5));
  p = V::fma(p, r, V::set1(1.0));
  p = V::fma(p, r, V::set1(1.0));

  return V::ldexp2(p, k);
}

template <class V>
inline typename V::reg erfc_core(typename V::reg z) {
  using R = typename V::reg;

  R w = V::abs(z);
  w = V::min(w, V::set1(28.0));  // erfc(28) underflows; beyond is 0 or 2
  const R s = V::mul(w, w);

  // |z| <= 0.46875: erf(z) = z * P(z^2)/Q(z^2)
  R xnum = V::mul(V::set1(1.85777706184603153e-1), s);
  R xden = s;
  xnum = V::mul(V::add(xnum, V::set1(3.16112374387056560e+0)), s);
  xden = V::mul(V::add(xden, V::set1(2.36012909523441209e+1)), s);
  xnum = V::mul(V::add(xnum, V::set1(1.13864154151050156e+2)), s);
  xden = V::mul(V::add(xden, V::set1(2.44024637934444173e+2)), s);
  xnum = V::mul(V::add(xnum, V::set1(3.77485237685302021e+2)), s);
  xden = V::mul(V::add(xden, V::set1(1.28261652607737228e+3)), s);
  const R erf_small = V::div(
      V::mul(z, V::add(xnum, V::set1(3.20937758913846947e+3))),
      V::add(xden, V::set1(2.84423683343917062e+3)));

  // 0.46875 < w <= 4: erfc(w) = exp(-w^2) * P(w)/Q(w)
  xnum = V::mul(V::set1(2.15311535474403846e-8), w);
  xden = w;
  xnum = V::mul(V::add(xnum, V::set1(5.64188496988670089e-1)), w);
  xden = V::mul(V::add(xden, V::set1(1.57449261107098347e+1)), w);
  xnum = V::mul(V::add(xnum, V::set1(8.88314979438837594e+0)), w);
  xden = V::mul(V::add(xden, V::set1(1.17693950891312499e+2)), w);
  xnum = V::mul(V::add(xnum, V::set1(6.61191906371416295e+1)), w);
  xden = V::mul(V::add(xden, V::set1(5.37181101862009858e+2)), w);
  xnum = V::mul(V::add(xnum, V::set1(2.98635138197400131e+2)), w);
  xden = V::mul(V::add(xden, V::set1(1.62138957456669019e+3)), w);
  xnum = V::mul(V::add(xnum, V::set1(8.81952221241769090e+2)), w);
  xden = V::mul(V::add(xden, V::set1(3.29079923573345963e+3)), w);
  xnum = V::mul(V::add(xnum, V::set1(1.71204761263407058e+3)), w);
  xden = V::mul(V::add(xden, V::set1(4.36261909014324716e+3)), w);
  xnum = V::mul(V::add(xnum, V::set1(2.05107837782607147e+3)), w);
  xden = V::mul(V::add(xden, V::set1(3.43936767414372164e+3)), w);
  const R ratio_mid = V::div(V::add(xnum, V::set1(1.23033935479799725e+3)),
                             V::add(xden, V::set1(1.23033935480374942e+3)));

  // w > 4: erfc(w) = exp(-w^2)/w * (1/sqrt(pi) - z2*P(z2)/Q(z2)), z2 = 1/w^2
  const R z2 = V::div(V::set1(1.0), s);
  xnum = V::mul(V::set1(1.63153871373020978e-2), z2);
  xden = z2;
  xnum = V::mul(V::add(xnum, V::set1(3.05326634961232344e-1)), z2);
  xden = V::mul(V::add(xden, V::set1(2.56852019228982242e+0)), z2);
  xnum = V::mul(V::add(xnum, V::set1(3.60344899949804439e-1)), z2);
  xden = V::mul(V::add(xden, V::set1(1.87295284992346047e+0)), z2);
  xnum = V::mul(V::add(xnum, V::set1(1.25781726111229246e-1)), z2);
  xden = V::mul(V::add(xden, V::set1(5.27905102951428412e-1)), z2);
  xnum = V::mul(V::add(xnum, V::set1(1.60837851487422766e-2)), z2);
  xden = V::mul(V::add(xden, V::set1(6.05183413124413191e-2)), z2);
  R ratio_far = V::mul(z2, V::div(V::add(xnum, V::set1(6.58749161529837803e-4)),
                                  V::add(xden, V::set1(2.33520497626869185e-3))));
  ratio_far = V::div(V::sub(V::set1(5.6418958354775628695e-1), ratio_far), w);

  // exp(-w*w) with the exact-split trick
  const R ws = V::mul(V::trunc(V::mul(w, V::set1(16.0))), V::set1(0.0625));
  const R del = V::mul(V::sub(w, ws), V::add(w, ws));
  const R e = V::mul(exp_core<V>(V::neg(V::mul(ws, ws))),
                     exp_core<V>(V::neg(del)));

  const R ratio = V::select(V::cmp_le(w, V::set1(4.0)), ratio_mid, ratio_far);
  const R pos = V::mul(e, ratio);
  const R reflected =
      V::select(V::cmp_lt(z, V::set1(0.0)), V::sub(V::set1(2.0), pos), pos);

  return V::select(V::cmp_le(w, V::set1(0.46875)),
                   V::sub(V::set1(1.0), erf_small), reflected);
}

template <class V>
inline typename V::reg norm_cdf_core(typename V::reg x) {
  const auto z = V::mul(x, V::set1(-0.7071067811865475244));
  return V::mul(V::set1(0.5), erfc_core<V>(z));
}

// ---- array drivers -------------------------------------------------------

template <class V>
void exp_array_t(const double* x, double* y, std::size_t n) {
  constexpr std::size_t W = V::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W) V::store(y + i, exp_core<V>(V::load(x + i)));
  if (i < n) {
    double in[W] = {0}, out[W];
    std::memcpy(in, x + i, (n - i) * sizeof(double));
    V::store(out, exp_core<V>(V::load(in)));
    std::memcpy(y + i, out, (n - i) * sizeof(double));
  }
}

template <class V>
void norm_cdf_array_t(const double* x, double* y, std::size_t n) {
  constexpr std::size_t W = V::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W) V::store(y + i, norm_cdf_core<V>(V::load(x + i)));
  if (i < n) {
    double in[W] = {0}, out[W];
    std::memcpy(in, x + i, (n - i) * sizeof(double));
    V::store(out, norm_cdf_core<V>(V::load(in)));
    std::memcpy(y + i, out, (n - i) * sizeof(double));
  }
}

template <class V>
void sq_exp_corr_row_t(const double* pts, std::size_t n, std::size_t d,
                       const double* q, const double* theta, double* out) {
  constexpr std::size_t W = V::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    auto acc = V::set1(0.0);
    for (std::size_t j = 0; j < d; ++j) {
      const auto diff = V::sub(V::set1(q[j]), V::load(pts + j * n + i));
      acc = V::fma(V::mul(diff, V::set1(theta[j])), diff, acc);
    }
    V::store(out + i, exp_core<V>(V::neg(acc)));
  }
  if (i < n) {
    const std::size_t rem = n - i;
    double in[8 * W];  // padded tail, one column per dimension chunk
    double res[W];
    auto acc = V::set1(0.0);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t t = 0; t < W; ++t)
        in[t] = t < rem ? pts[j * n + i + t] : q[j];
      const auto diff = V::sub(V::set1(q[j]), V::load(in));
      acc = V::fma(V::mul(diff, V::set1(theta[j])), diff, acc);
    }
    V::store(res, exp_core<V>(V::neg(acc)));
    std::memcpy(out + i, res, rem * sizeof(double));
  }
}

template <class V>
std::size_t count_less_t(const double* x, std::size_t n, double bound) {
  constexpr std::size_t W = V::width;
  const auto b = V::set1(bound);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + W <= n; i += W) count += V::count_lt(V::load(x + i), b);
  for (; i < n; ++i) count += x[i] < bound ? 1 : 0;
  return count;
}

}  // namespace rarebound::simd
