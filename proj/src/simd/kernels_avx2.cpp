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

#include <immintrin.h>

#include <cmath>

#include "simd_tables.hpp"

namespace concept_tab::simd {
namespace {

// Horizontal sum in a fixed lane order so results do not depend on the
// compiler's choice of shuffle sequence.
inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc,
                        _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                      _mm256_loadu_pd(y + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void accumulate_avx2(const double* x, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                            _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void accumulate_sq_dev_avx2(const double* x, const double* mu, double* acc,
                            std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mu + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                            _mm256_mul_pd(d, d)));
  }
  for (; i < n; ++i) {
    const double d = x[i] - mu[i];
    acc[i] += d * d;
  }
}

void affine_avx2(const double* x, const double* mu, const double* scale,
                 double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mu + i));
    _mm256_storeu_pd(out + i, _mm256_div_pd(d, _mm256_loadu_pd(scale + i)));
  }
  for (; i < n; ++i) out[i] = (x[i] - mu[i]) / scale[i];
}

double weighted_abs_sum_avx2(const double* diff, const double* len,
                             std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(diff + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(a, _mm256_loadu_pd(len + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(diff[i]) * len[i];
  return s;
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{
      Isa::kAvx2,          "avx2",
      dot_avx2,            axpy_avx2,
      accumulate_avx2,     accumulate_sq_dev_avx2,
      affine_avx2,         weighted_abs_sum_avx2,
  };
  return table;
}

}  // namespace concept_tab::simd
