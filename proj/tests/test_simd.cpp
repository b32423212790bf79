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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rarebound/rng.hpp"
#include "rarebound/simd.hpp"

using namespace rarebound;

namespace {

std::vector<simd::Isa> available_isas() {
  std::vector<simd::Isa> isas{simd::Isa::scalar};
  if (simd::isa_available(simd::Isa::avx2)) isas.push_back(simd::Isa::avx2);
  if (simd::isa_available(simd::Isa::neon)) isas.push_back(simd::Isa::neon);
  return isas;
}

bool close_rel(double a, double b, double rel, double abs_floor) {
  if (a == b) return true;  // covers equal infinities
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace

TEST_CASE("exp kernels match libm across instruction sets") {
  Rng rng(42);
  std::vector<double> x;
  for (int i = 0; i < 5000; ++i) x.push_back(rng.uniform(-30.0, 5.0));
  for (int i = 0; i < 2000; ++i) x.push_back(rng.uniform(-760.0, 720.0));
  for (double v : {0.0, -0.0, 1.0, -1.0, -708.0, -709.9, -745.0, -746.0,
                   709.0, 710.0, 1e-300, -1e-300, 0.3465, -0.3466})
    x.push_back(v);

  const auto& ref = simd::detail::table(simd::Isa::scalar);
  std::vector<double> want(x.size()), got(x.size());
  ref.exp_array(x.data(), want.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(want[i] == std::exp(x[i]));  // the scalar kernel IS libm

  for (const auto isa : available_isas()) {
    CAPTURE(simd::isa_name(isa));
    const auto& t = simd::detail::table(isa);
    t.exp_array(x.data(), got.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(x[i]);
      CHECK(close_rel(got[i], want[i], 4e-15, 1e-305));
    }
  }
}

TEST_CASE("normal CDF kernels match the scalar reference") {
  Rng rng(43);
  std::vector<double> x;
  for (int i = 0; i < 5000; ++i) x.push_back(rng.uniform(-8.0, 8.0));
  for (int i = 0; i < 2000; ++i) x.push_back(rng.uniform(-40.0, 40.0));
  for (double v : {0.0, -0.0, 0.46, -0.47, 0.6629, -0.6629, 5.6568, -5.6568,
                   -37.0, -38.6, 9.0, -3.0, 3.0})
    x.push_back(v);  // region boundaries are at |z| = 0.46875 and 4 in erfc

  const auto& ref = simd::detail::table(simd::Isa::scalar);
  std::vector<double> want(x.size()), got(x.size());
  ref.norm_cdf_array(x.data(), want.data(), x.size());

  for (const auto isa : available_isas()) {
    CAPTURE(simd::isa_name(isa));
    const auto& t = simd::detail::table(isa);
    t.norm_cdf_array(x.data(), got.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(x[i]);
      CHECK(close_rel(got[i], want[i], 2e-13, 1e-300));
    }
  }
}

TEST_CASE("correlation-row kernels agree") {
  Rng rng(44);
  for (const std::size_t n : {1u, 3u, 4u, 7u, 50u, 129u}) {
    for (const std::size_t d : {1u, 2u, 5u, 26u}) {
      std::vector<double> pts(n * d), q(d), theta(d);
      for (auto& v : pts) v = rng.uniform(-10.0, 10.0);
      for (auto& v : q) v = rng.uniform(-10.0, 10.0);
      for (auto& v : theta) v = rng.uniform(1e-3, 2.0);

      std::vector<double> want(n), got(n);
      simd::detail::table(simd::Isa::scalar)
          .sq_exp_corr_row(pts.data(), n, d, q.data(), theta.data(), want.data());
      for (const auto isa : available_isas()) {
        CAPTURE(simd::isa_name(isa));
        CAPTURE(n);
        CAPTURE(d);
        simd::detail::table(isa).sq_exp_corr_row(pts.data(), n, d, q.data(),
                                                 theta.data(), got.data());
        for (std::size_t i = 0; i < n; ++i)
          CHECK(close_rel(got[i], want[i], 1e-12, 1e-305));
      }
    }
  }
}

TEST_CASE("count_less is exact and strict") {
  Rng rng(45);
  std::vector<double> x(1003);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  x[17] = 0.25;  // exactly the bound: strict comparison excludes it
  x[800] = 0.25;
  std::size_t want = 0;
  for (const double v : x) want += v < 0.25 ? 1 : 0;
  for (const auto isa : available_isas()) {
    CAPTURE(simd::isa_name(isa));
    CHECK(simd::detail::table(isa).count_less(x.data(), x.size(), 0.25) == want);
  }
}

TEST_CASE("dispatch honors set_isa") {
  const simd::Isa before = simd::active_isa();
  simd::set_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  double x = -1.5, y = 0.0;
  simd::exp_array(&x, &y, 1);
  CHECK(y == std::exp(-1.5));
  simd::set_isa(before);
  CHECK(simd::active_isa() == before);
}
