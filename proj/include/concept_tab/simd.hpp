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

#pragma once

#include <cstddef>
#include <string_view>

namespace concept_tab::simd {

enum class Isa { kScalar, kAvx2 };

// Function table for the data-parallel inner loops. Lane-wise kernels
// (accumulate, accumulate_sq_dev, affine, axpy) are bit-identical across
// ISAs; reductions (dot, weighted_abs_sum) differ only by summation order.
struct KernelTable {
  Isa isa;
  std::string_view name;

  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // acc[i] += x[i]
  void (*accumulate)(const double* x, double* acc, std::size_t n);
  // acc[i] += (x[i] - mu[i])^2
  void (*accumulate_sq_dev)(const double* x, const double* mu, double* acc,
                            std::size_t n);
  // out[i] = (x[i] - mu[i]) / scale[i]
  void (*affine)(const double* x, const double* mu, const double* scale,
                 double* out, std::size_t n);
  // sum_i |diff[i]| * len[i]
  double (*weighted_abs_sum)(const double* diff, const double* len,
                             std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Active table. Chosen once: AVX2 when available unless the environment
// variable CONCEPT_TAB_SIMD=scalar is set; overridable with force_isa().
const KernelTable& kernels();

// Returns false (and leaves the selection unchanged) if `isa` is unavailable.
bool force_isa(Isa isa);

}  // namespace concept_tab::simd
