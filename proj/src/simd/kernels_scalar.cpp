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

#include "simd_tables.hpp"

namespace concept_tab::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void accumulate_scalar(const double* x, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void accumulate_sq_dev_scalar(const double* x, const double* mu, double* acc,
                              std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mu[i];
    acc[i] += d * d;
  }
}

void affine_scalar(const double* x, const double* mu, const double* scale,
                   double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mu[i]) / scale[i];
}

double weighted_abs_sum_scalar(const double* diff, const double* len,
                               std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(diff[i]) * len[i];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Isa::kScalar,          "scalar",
      dot_scalar,            axpy_scalar,
      accumulate_scalar,     accumulate_sq_dev_scalar,
      affine_scalar,         weighted_abs_sum_scalar,
  };
  return table;
}

}  // namespace concept_tab::simd
