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

// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.

#include "mmsense/simd/kernels.hpp"

#include <algorithm>
#include <immintrin.h>

namespace mmsense::simd::avx2
{
namespace
{

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double *x, const double *y, std::size_t n)
{
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16)
    {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
    }
    for (; i + 4 <= n; i += 4)
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
    for (; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

void axpy(double a, const double *x, double *y, std::size_t n)
{
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
    {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        y[i] += a * x[i];
}

double sum_squares(const double *x, std::size_t n)
{
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
    {
        const __m256d v0 = _mm256_loadu_pd(x + i);
        const __m256d v1 = _mm256_loadu_pd(x + i + 4);
        a0 = _mm256_fmadd_pd(v0, v0, a0);
        a1 = _mm256_fmadd_pd(v1, v1, a1);
    }
    for (; i + 4 <= n; i += 4)
    {
        const __m256d v0 = _mm256_loadu_pd(x + i);
        a0 = _mm256_fmadd_pd(v0, v0, a0);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i)
        s += x[i] * x[i];
    return s;
}

// Four columns per pass so each x chunk is loaded once.
void gemv_t(const double *a, std::size_t lda, std::size_t n, std::size_t r, const double *x, double *out)
{
    std::size_t l = 0;
    for (; l + 4 <= r; l += 4)
    {
        const double *c0 = a + l * lda;
        const double *c1 = c0 + lda;
        const double *c2 = c1 + lda;
        const double *c3 = c2 + lda;
        __m256d s0 = _mm256_setzero_pd();
        __m256d s1 = _mm256_setzero_pd();
        __m256d s2 = _mm256_setzero_pd();
        __m256d s3 = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4)
        {
            const __m256d xv = _mm256_loadu_pd(x + i);
            s0 = _mm256_fmadd_pd(_mm256_loadu_pd(c0 + i), xv, s0);
            s1 = _mm256_fmadd_pd(_mm256_loadu_pd(c1 + i), xv, s1);
            s2 = _mm256_fmadd_pd(_mm256_loadu_pd(c2 + i), xv, s2);
            s3 = _mm256_fmadd_pd(_mm256_loadu_pd(c3 + i), xv, s3);
        }
        double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
        for (; i < n; ++i)
        {
            t0 += c0[i] * x[i];
            t1 += c1[i] * x[i];
            t2 += c2[i] * x[i];
            t3 += c3[i] * x[i];
        }
        out[l] = t0;
        out[l + 1] = t1;
        out[l + 2] = t2;
        out[l + 3] = t3;
    }
    for (; l < r; ++l)
        out[l] = dot(a + l * lda, x, n);
}

void gemv_n(const double *a, std::size_t lda, std::size_t n, std::size_t r, const double *c, double *y)
{
    std::size_t l = 0;
    for (; l + 4 <= r; l += 4)
    {
        const double *c0 = a + l * lda;
        const double *c1 = c0 + lda;
        const double *c2 = c1 + lda;
        const double *c3 = c2 + lda;
        const __m256d k0 = _mm256_set1_pd(c[l]);
        const __m256d k1 = _mm256_set1_pd(c[l + 1]);
        const __m256d k2 = _mm256_set1_pd(c[l + 2]);
        const __m256d k3 = _mm256_set1_pd(c[l + 3]);
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4)
        {
            __m256d yv = _mm256_loadu_pd(y + i);
            yv = _mm256_fmadd_pd(k0, _mm256_loadu_pd(c0 + i), yv);
            yv = _mm256_fmadd_pd(k1, _mm256_loadu_pd(c1 + i), yv);
            yv = _mm256_fmadd_pd(k2, _mm256_loadu_pd(c2 + i), yv);
            yv = _mm256_fmadd_pd(k3, _mm256_loadu_pd(c3 + i), yv);
            _mm256_storeu_pd(y + i, yv);
        }
        for (; i < n; ++i)
            y[i] += c[l] * c0[i] + c[l + 1] * c1[i] + c[l + 2] * c2[i] + c[l + 3] * c3[i];
    }
    for (; l < r; ++l)
        axpy(c[l], a + l * lda, y, n);
}

// Complex values are interleaved (re, im); one __m256d holds two of them.
cdouble cdotc(const cdouble *x, const cdouble *y, std::size_t n)
{
    const double *xd = reinterpret_cast<const double *>(x);
    const double *yd = reinterpret_cast<const double *>(y);
    __m256d same0 = _mm256_setzero_pd(); // xr*yr, xi*yi
    __m256d swap0 = _mm256_setzero_pd(); // xr*yi, xi*yr
    __m256d same1 = _mm256_setzero_pd();
    __m256d swap1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
    {
        const __m256d xv0 = _mm256_loadu_pd(xd + 2 * i);
        const __m256d yv0 = _mm256_loadu_pd(yd + 2 * i);
        const __m256d xv1 = _mm256_loadu_pd(xd + 2 * i + 4);
        const __m256d yv1 = _mm256_loadu_pd(yd + 2 * i + 4);
        same0 = _mm256_fmadd_pd(xv0, yv0, same0);
        swap0 = _mm256_fmadd_pd(xv0, _mm256_permute_pd(yv0, 0b0101), swap0);
        same1 = _mm256_fmadd_pd(xv1, yv1, same1);
        swap1 = _mm256_fmadd_pd(xv1, _mm256_permute_pd(yv1, 0b0101), swap1);
    }
    for (; i + 2 <= n; i += 2)
    {
        const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        same0 = _mm256_fmadd_pd(xv, yv, same0);
        swap0 = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), swap0);
    }
    alignas(32) double s[4];
    alignas(32) double w[4];
    _mm256_store_pd(s, _mm256_add_pd(same0, same1));
    _mm256_store_pd(w, _mm256_add_pd(swap0, swap1));
    double re = (s[0] + s[2]) + (s[1] + s[3]);
    double im = (w[0] + w[2]) - (w[1] + w[3]);
    for (; i < n; ++i)
    {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xr * yi - xi * yr;
    }
    return {re, im};
}

void caxpy(cdouble a, const cdouble *x, cdouble *y, std::size_t n)
{
    const double *xd = reinterpret_cast<const double *>(x);
    double *yd = reinterpret_cast<double *>(y);
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
    {
        const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        // (ar*xr - ai*xi, ar*xi + ai*xr)
        const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, _mm256_permute_pd(xv, 0b0101)));
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
    }
    for (; i < n; ++i)
    {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = {y[i].real() + a.real() * xr - a.imag() * xi, y[i].imag() + a.real() * xi + a.imag() * xr};
    }
}

// Register block of QN rows of c by NV vectors of 4 columns. With Tail set
// the last vector is partial and goes through `mask`. Accumulators are named
// variables: GCC does not keep a 2-D array of them in registers.
template <int QN, int NV, bool Tail>
void gemm_block(std::size_t nk, const double *a, std::size_t aqs, std::size_t aks, const double *b,
                std::size_t ldb, double *c, std::size_t ldc, __m256i mask)
{
    __m256d c00 = _mm256_setzero_pd(), c01 = c00, c02 = c00;
    __m256d c10 = c00, c11 = c00, c12 = c00;
    __m256d c20 = c00, c21 = c00, c22 = c00;
    __m256d c30 = c00, c31 = c00, c32 = c00;
    const auto load_b = [&](const double *p, int v) {
        return (Tail && v == NV - 1) ? _mm256_maskload_pd(p, mask) : _mm256_loadu_pd(p);
    };
    for (std::size_t k = 0; k < nk; ++k)
    {
        const double *bk = b + k * ldb;
        const double *ak = a + k * aks;
        const __m256d b0 = load_b(bk, 0);
        const __m256d b1 = NV > 1 ? load_b(bk + 4, 1) : b0;
        const __m256d b2 = NV > 2 ? load_b(bk + 8, 2) : b0;
        const auto row = [&](int q, __m256d &x0, __m256d &x1, __m256d &x2) {
            const __m256d av = _mm256_broadcast_sd(ak + q * aqs);
            x0 = _mm256_fmadd_pd(av, b0, x0);
            if constexpr (NV > 1)
                x1 = _mm256_fmadd_pd(av, b1, x1);
            if constexpr (NV > 2)
                x2 = _mm256_fmadd_pd(av, b2, x2);
        };
        row(0, c00, c01, c02);
        if constexpr (QN > 1)
            row(1, c10, c11, c12);
        if constexpr (QN > 2)
            row(2, c20, c21, c22);
        if constexpr (QN > 3)
            row(3, c30, c31, c32);
    }
    const auto store = [&](int q, int v, __m256d acc) {
        double *cv = c + q * ldc + 4 * v;
        if (Tail && v == NV - 1)
            _mm256_maskstore_pd(cv, mask, _mm256_add_pd(_mm256_maskload_pd(cv, mask), acc));
        else
            _mm256_storeu_pd(cv, _mm256_add_pd(_mm256_loadu_pd(cv), acc));
    };
    const auto store_row = [&](int q, __m256d x0, __m256d x1, __m256d x2) {
        store(q, 0, x0);
        if constexpr (NV > 1)
            store(q, 1, x1);
        if constexpr (NV > 2)
            store(q, 2, x2);
    };
    store_row(0, c00, c01, c02);
    if constexpr (QN > 1)
        store_row(1, c10, c11, c12);
    if constexpr (QN > 2)
        store_row(2, c20, c21, c22);
    if constexpr (QN > 3)
        store_row(3, c30, c31, c32);
}

using BlockFn = void (*)(std::size_t, const double *, std::size_t, std::size_t, const double *, std::size_t,
                         double *, std::size_t, __m256i);

template <int QN>
BlockFn pick_block(int nv, bool tail)
{
    switch (nv * 2 + (tail ? 1 : 0))
    {
    case 2:
        return &gemm_block<QN, 1, false>;
    case 3:
        return &gemm_block<QN, 1, true>;
    case 4:
        return &gemm_block<QN, 2, false>;
    case 5:
        return &gemm_block<QN, 2, true>;
    case 6:
        return &gemm_block<QN, 3, false>;
    default:
        return &gemm_block<QN, 3, true>;
    }
}

BlockFn pick_block(std::size_t qn, int nv, bool tail)
{
    switch (qn)
    {
    case 1:
        return pick_block<1>(nv, tail);
    case 2:
        return pick_block<2>(nv, tail);
    case 3:
        return pick_block<3>(nv, tail);
    default:
        return pick_block<4>(nv, tail);
    }
}

void gemm(std::size_t nq, std::size_t nc, std::size_t nk, const double *a, std::size_t aqs, std::size_t aks,
          const double *b, std::size_t ldb, double *c, std::size_t ldc, bool accumulate)
{
    if (!accumulate)
        for (std::size_t q = 0; q < nq; ++q)
            for (std::size_t l = 0; l < nc; ++l)
                c[q * ldc + l] = 0.0;
    if (nc == 0)
        return;
    // Chunking k keeps the slab of `a` touched by all row blocks in cache.
    constexpr std::size_t kChunk = 256;
    for (std::size_t k0 = 0; k0 < nk; k0 += kChunk)
    {
        const std::size_t kn = std::min(kChunk, nk - k0);
        for (std::size_t q0 = 0; q0 < nq; q0 += 4)
        {
            const std::size_t qn = std::min<std::size_t>(4, nq - q0);
            for (std::size_t l0 = 0; l0 < nc; l0 += 12)
            {
                const std::size_t ln = std::min<std::size_t>(12, nc - l0);
                const int nv = static_cast<int>((ln + 3) / 4);
                const std::size_t rem = ln % 4;
                const __m256i mask = _mm256_setr_epi64x(-1, rem == 0 || rem > 1 ? -1 : 0,
                                                        rem == 0 || rem > 2 ? -1 : 0, rem == 0 ? -1 : 0);
                pick_block(qn, nv, rem != 0)(kn, a + q0 * aqs + k0 * aks, aqs, aks, b + k0 * ldb + l0, ldb,
                                             c + q0 * ldc + l0, ldc, mask);
            }
        }
    }
}

} // namespace

const KernelTable &table()
{
    static const KernelTable t{
        Isa::Avx2, &dot, &axpy, &sum_squares, &gemv_t, &gemv_n, &cdotc, &caxpy, &gemm,
    };
    return t;
}

} // namespace mmsense::simd::avx2
