// SPDX-License-Identifier: Apache-2.0
//
// mmsense - massive-MIMO activity sensing toolkit
// Copyright (C) 2026 The mmsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMSENSE_SIMD_KERNELS_HPP
#define MMSENSE_SIMD_KERNELS_HPP

// Inner-loop kernels behind the tensor, correlation, ALS and MLP code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at first use from CPUID;
// setting MMSENSE_SIMD=scalar in the environment forces the reference path.
// Variants agree to rounding (summation order differs), not bit-for-bit, so
// results are reproducible per machine and per selected variant.

#include <complex>
#include <cstddef>
#include <string_view>

namespace mmsense::simd
{

using cdouble = std::complex<double>;

enum class Isa
{
    Scalar,
    Avx2
};

std::string_view to_string(Isa isa);

struct KernelTable
{
    Isa isa;

    // sum_i x[i] * y[i]
    double (*dot)(const double *x, const double *y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double *x, double *y, std::size_t n);
    // sum_i x[i]^2
    double (*sum_squares)(const double *x, std::size_t n);
    // out[l] = sum_i a[i + l*lda] * x[i], l < r  (A^T x for column-major A)
    void (*gemv_t)(const double *a, std::size_t lda, std::size_t n, std::size_t r, const double *x, double *out);
    // y[i] += sum_l c[l] * a[i + l*lda]          (y += A c)
    void (*gemv_n)(const double *a, std::size_t lda, std::size_t n, std::size_t r, const double *c, double *y);
    // sum_i conj(x[i]) * y[i]
    cdouble (*cdotc)(const cdouble *x, const cdouble *y, std::size_t n);
    // y[i] += a * x[i]
    void (*caxpy)(cdouble a, const cdouble *x, cdouble *y, std::size_t n);
    // c[q*ldc + l] (+)= sum_k a[q*aqs + k*aks] * b[k*ldb + l], q < nq, l < nc.
    // The strides on `a` let one kernel serve both A*B and A^T*B for a
    // column-major A. Overwrites c unless `accumulate`.
    void (*gemm)(std::size_t nq, std::size_t nc, std::size_t nk, const double *a, std::size_t aqs,
                 std::size_t aks, const double *b, std::size_t ldb, double *c, std::size_t ldc, bool accumulate);
};

const KernelTable &scalar_kernels();

// nullptr when the CPU (or the build) lacks AVX2+FMA.
const KernelTable *avx2_kernels();

// The table selected for this process.
const KernelTable &active();

} // namespace mmsense::simd

#endif
