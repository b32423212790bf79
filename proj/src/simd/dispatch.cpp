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

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kernels_internal.hpp"
#include "rarebound/errors.hpp"
#include "rarebound/simd.hpp"

namespace rarebound::simd {
namespace {

std::atomic<const detail::KernelTable*> g_table{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

Isa detect() {
  if (const char* env = std::getenv("RAREBOUND_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && isa_available(Isa::avx2))
      return Isa::avx2;
    if (std::strcmp(env, "neon") == 0 && isa_available(Isa::neon))
      return Isa::neon;
  }
#if defined(RAREBOUND_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::avx2;
#endif
#if defined(RAREBOUND_HAVE_NEON)
  return Isa::neon;
#endif
  return Isa::scalar;
}

const detail::KernelTable& current() {
  const detail::KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    const Isa isa = detect();
    t = &detail::table(isa);
    g_isa.store(isa, std::memory_order_relaxed);
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(RAREBOUND_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(RAREBOUND_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  current();
  return g_isa.load(std::memory_order_relaxed);
}

void set_isa(Isa isa) {
  if (!isa_available(isa))
    throw PreconditionError(std::string("instruction set not available: ") +
                            isa_name(isa));
  g_table.store(&detail::table(isa), std::memory_order_release);
  g_isa.store(isa, std::memory_order_relaxed);
}

void exp_array(const double* x, double* y, std::size_t n) {
  current().exp_array(x, y, n);
}
void norm_cdf_array(const double* x, double* y, std::size_t n) {
  current().norm_cdf_array(x, y, n);
}
void sq_exp_corr_row(const double* pts, std::size_t n, std::size_t d,
                     const double* q, const double* theta, double* out) {
  current().sq_exp_corr_row(pts, n, d, q, theta, out);
}
std::size_t count_less(const double* x, std::size_t n, double bound) {
  return current().count_less(x, n, bound);
}

namespace detail {

const KernelTable& table(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return scalar_impl::kTable;
    case Isa::avx2:
#if defined(RAREBOUND_HAVE_AVX2)
      if (isa_available(Isa::avx2)) return avx2_impl::kTable;
#endif
      break;
    case Isa::neon:
#if defined(RAREBOUND_HAVE_NEON)
      return neon_impl::kTable;
#endif
      break;
  }
  throw PreconditionError(std::string("instruction set not available: ") +
                          isa_name(isa));
}

}  // namespace detail

}  // namespace rarebound::simd
