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

#include "rarebound/simd.hpp"

namespace rarebound::simd {

namespace scalar_impl {
extern const detail::KernelTable kTable;
}

#if defined(RAREBOUND_HAVE_AVX2)
namespace avx2_impl {
extern const detail::KernelTable kTable;
}
#endif

#if defined(RAREBOUND_HAVE_NEON)
namespace neon_impl {
extern const detail::KernelTable kTable;
}
#endif

}  // namespace rarebound::simd
