// Copyright 2026 The concept_tab Authors
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

#include <cmath>
#include <random>

#include "doctest.h"

#include "concept_tab/simd.hpp"

using namespace concept_tab::simd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -10.0,
                               double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar table is always present and selection is overridable") {
  CHECK(scalar_kernels().isa == Isa::kScalar);
  CHECK(force_isa(Isa::kScalar));
  CHECK(kernels().isa == Isa::kScalar);
  if (avx2_kernels()) {
    CHECK(force_isa(Isa::kAvx2));
    CHECK(kernels().isa == Isa::kAvx2);
  } else {
    CHECK(!force_isa(Isa::kAvx2));
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* avx = avx2_kernels();
  if (!avx) {
    MESSAGE("AVX2 unavailable on this host; equivalence not exercised");
    return;
  }
  const KernelTable& ref = scalar_kernels();
  std::mt19937_64 rng(1234);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    const auto mu = random_vec(rng, n);
    const auto scale = random_vec(rng, n, 0.1, 5.0);
    const auto len = random_vec(rng, n, 0.0, 2.0);

    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::fabs(x[i] * y[i]);
    CHECK(std::fabs(ref.dot(x.data(), y.data(), n) - avx->dot(x.data(), y.data(), n)) <=
          1e-14 * (mag + 1.0));

    double wmag = 0.0;
    for (std::size_t i = 0; i < n; ++i) wmag += std::fabs(x[i]) * len[i];
    CHECK(std::fabs(ref.weighted_abs_sum(x.data(), len.data(), n) -
                    avx->weighted_abs_sum(x.data(), len.data(), n)) <= 1e-14 * (wmag + 1.0));

    auto a1 = y;
    auto a2 = y;
    ref.axpy(0.37, x.data(), a1.data(), n);
    avx->axpy(0.37, x.data(), a2.data(), n);
    CHECK(a1 == a2);

    a1 = y;
    a2 = y;
    ref.accumulate(x.data(), a1.data(), n);
    avx->accumulate(x.data(), a2.data(), n);
    CHECK(a1 == a2);

    a1 = y;
    a2 = y;
    ref.accumulate_sq_dev(x.data(), mu.data(), a1.data(), n);
    avx->accumulate_sq_dev(x.data(), mu.data(), a2.data(), n);
    CHECK(a1 == a2);

    std::vector<double> o1(n), o2(n);
    ref.affine(x.data(), mu.data(), scale.data(), o1.data(), n);
    avx->affine(x.data(), mu.data(), scale.data(), o2.data(), n);
    CHECK(o1 == o2);
  }
}

TEST_CASE("avx2 kernels are deterministic across calls") {
  const KernelTable* avx = avx2_kernels();
  if (!avx) return;
  std::mt19937_64 rng(9);
  const auto x = random_vec(rng, 1001);
  const auto y = random_vec(rng, 1001);
  CHECK(avx->dot(x.data(), y.data(), x.size()) == avx->dot(x.data(), y.data(), x.size()));
}
