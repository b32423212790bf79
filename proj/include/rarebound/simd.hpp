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

#include <cstddef>

// Runtime-dispatched array kernels for the Monte Carlo inner loops.
//
// Every kernel exists as a scalar reference implementation (plain loops over
// libm) and, where the hardware supports it, as an AVX2 or NEON variant
// selected at startup. The variants are equivalence-tested against the scalar
// reference; all consumers go through the dispatching entry points below.

namespace rarebound::simd {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);

/// The instruction set the dispatching entry points currently use. Detected
/// once at first use; the RAREBOUND_SIMD environment variable (scalar | avx2 |
/// neon) overrides detection.
Isa active_isa();

/// Force a specific instruction set (throws PreconditionError if unavailable).
void set_isa(Isa isa);

/// y[i] = exp(x[i])
void exp_array(const double* x, double* y, std::size_t n);

/// y[i] = Phi(x[i]), the standard normal CDF
void norm_cdf_array(const double* x, double* y, std::size_t n);

/// Squared-exponential correlation row against a fixed point set:
///   out[i] = exp(-sum_j theta[j] * (q[j] - pts[j*n + i])^2),  i = 0..n-1
/// `pts` is the point set stored column-major (all first coordinates, then all
/// second coordinates, ...), `q` and `theta` have length d.
void sq_exp_corr_row(const double* pts, std::size_t n, std::size_t d,
                     const double* q, const double* theta, double* out);

/// Number of entries with x[i] < bound.
std::size_t count_less(const double* x, std::size_t n, double bound);

namespace detail {

struct KernelTable {
  void (*exp_array)(const double*, double*, std::size_t);
  void (*norm_cdf_array)(const double*, double*, std::size_t);
  void (*sq_exp_corr_row)(const double*, std::size_t, std::size_t,
                          const double*, const double*, double*);
  std::size_t (*count_less)(const double*, std::size_t, double);
};

/// Direct access to a specific implementation (used by the equivalence tests).
/// Throws PreconditionError if the ISA is not available in this build/CPU.
const KernelTable& table(Isa isa);

}  // namespace detail

}  // namespace rarebound::simd
