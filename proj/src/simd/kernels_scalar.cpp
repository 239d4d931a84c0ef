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

#include "mmsense/simd/kernels.hpp"

namespace mmsense::simd
{
namespace
{

double dot_scalar(const double *x, const double *y, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

void axpy_scalar(double a, const double *x, double *y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

double sum_squares_scalar(const double *x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i] * x[i];
    return s;
}

void gemv_t_scalar(const double *a, std::size_t lda, std::size_t n, std::size_t r, const double *x, double *out)
{
    for (std::size_t l = 0; l < r; ++l)
        out[l] = dot_scalar(a + l * lda, x, n);
}

void gemv_n_scalar(const double *a, std::size_t lda, std::size_t n, std::size_t r, const double *c, double *y)
{
    for (std::size_t l = 0; l < r; ++l)
        axpy_scalar(c[l], a + l * lda, y, n);
}

cdouble cdotc_scalar(const cdouble *x, const cdouble *y, std::size_t n)
{
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xr * yi - xi * yr;
    }
    return {re, im};
}

void caxpy_scalar(cdouble a, const cdouble *x, cdouble *y, std::size_t n)
{
    const double ar = a.real(), ai = a.imag();
    for (std::size_t i = 0; i < n; ++i)
    {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
    }
}

void gemm_scalar(std::size_t nq, std::size_t nc, std::size_t nk, const double *a, std::size_t aqs,
                 std::size_t aks, const double *b, std::size_t ldb, double *c, std::size_t ldc, bool accumulate)
{
    for (std::size_t q = 0; q < nq; ++q)
    {
        double *cq = c + q * ldc;
        if (!accumulate)
            for (std::size_t l = 0; l < nc; ++l)
                cq[l] = 0.0;
        for (std::size_t k = 0; k < nk; ++k)
            axpy_scalar(a[q * aqs + k * aks], b + k * ldb, cq, nc);
    }
}

} // namespace

const KernelTable &scalar_kernels()
{
    static const KernelTable table{
        Isa::Scalar,
        &dot_scalar,
        &axpy_scalar,
        &sum_squares_scalar,
        &gemv_t_scalar,
        &gemv_n_scalar,
        &cdotc_scalar,
        &caxpy_scalar,
        &gemm_scalar,
    };
    return table;
}

} // namespace mmsense::simd
