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

// Equivalence of the vector kernels against the scalar reference, over
// lengths that exercise every tail path.

#include "doctest.h"

#include "mmsense/simd/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

using namespace mmsense::simd;

namespace
{

std::vector<const KernelTable *> variants()
{
    std::vector<const KernelTable *> v{&scalar_kernels()};
    if (const KernelTable *t = avx2_kernels())
        v.push_back(t);
    return v;
}

std::vector<double> randn(std::size_t n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (auto &x : v)
        x = d(rng);
    return v;
}

std::vector<cdouble> crandn(std::size_t n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> d;
    std::vector<cdouble> v(n);
    for (auto &x : v)
        x = {d(rng), d(rng)};
    return v;
}

const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100, 257};

} // namespace

TEST_CASE("dispatcher reports a usable table")
{
    const KernelTable &k = active();
    MESSAGE("active kernels: " << to_string(k.isa));
    CHECK((k.isa == Isa::Scalar || avx2_kernels() != nullptr));
}

TEST_CASE("real kernels agree with scalar loops")
{
    std::mt19937_64 rng(1);
    for (const KernelTable *k : variants())
    {
        CAPTURE(to_string(k->isa));
        for (std::size_t n : kLengths)
        {
            CAPTURE(n);
            const auto x = randn(n, rng);
            const auto y = randn(n, rng);
            double ref_dot = 0.0, ref_ss = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                ref_dot += x[i] * y[i];
                ref_ss += x[i] * x[i];
                scale += std::abs(x[i] * y[i]);
            }
            CHECK(std::abs(k->dot(x.data(), y.data(), n) - ref_dot) <= 1e-13 * (1.0 + scale));
            CHECK(std::abs(k->sum_squares(x.data(), n) - ref_ss) <= 1e-13 * (1.0 + ref_ss));

            auto z = y;
            k->axpy(0.75, x.data(), z.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(z[i] - (y[i] + 0.75 * x[i])) <= 1e-15 * (1.0 + std::abs(z[i])));
        }
    }
}

TEST_CASE("gemv kernels agree with scalar loops")
{
    std::mt19937_64 rng(2);
    for (const KernelTable *k : variants())
    {
        CAPTURE(to_string(k->isa));
        for (std::size_t n : {1ul, 3ul, 4ul, 9ul, 100ul})
            for (std::size_t r : {1ul, 3ul, 4ul, 5ul, 10ul})
            {
                const std::size_t lda = n + 2;
                const auto a = randn(lda * r, rng);
                const auto x = randn(n, rng);
                const auto c = randn(r, rng);
                std::vector<double> out(r);
                k->gemv_t(a.data(), lda, n, r, x.data(), out.data());
                for (std::size_t l = 0; l < r; ++l)
                {
                    double ref = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        ref += a[i + l * lda] * x[i];
                    CHECK(std::abs(out[l] - ref) <= 1e-12);
                }
                auto y = randn(n, rng);
                auto y0 = y;
                k->gemv_n(a.data(), lda, n, r, c.data(), y.data());
                for (std::size_t i = 0; i < n; ++i)
                {
                    double ref = y0[i];
                    for (std::size_t l = 0; l < r; ++l)
                        ref += c[l] * a[i + l * lda];
                    CHECK(std::abs(y[i] - ref) <= 1e-12);
                }
            }
    }
}

TEST_CASE("gemm agrees with a triple loop for both operand layouts")
{
    std::mt19937_64 rng(4);
    for (const KernelTable *k : variants())
    {
        CAPTURE(to_string(k->isa));
        for (std::size_t m : {1ul, 3ul, 4ul, 7ul, 33ul})
            for (std::size_t n : {1ul, 5ul, 300ul})
                for (std::size_t r : {1ul, 2ul, 3ul, 4ul, 5ul, 10ul, 12ul, 13ul, 27ul})
                    for (bool transposed : {false, true})
                        for (bool accumulate : {false, true})
                        {
                            CAPTURE(m);
                            CAPTURE(n);
                            CAPTURE(r);
                            CAPTURE(transposed);
                            // A is m x n column-major; rows of c index m (A B) or n (A^T B).
                            const std::size_t lda = m + 1;
                            const auto a = randn(lda * n, rng);
                            const std::size_t nq = transposed ? n : m;
                            const std::size_t nk = transposed ? m : n;
                            const std::size_t ldb = r + 2, ldc = r + 3;
                            const auto b = randn(nk * ldb, rng);
                            auto c = randn(nq * ldc, rng);
                            const auto c0 = c;
                            const std::size_t aqs = transposed ? lda : 1;
                            const std::size_t aks = transposed ? 1 : lda;
                            k->gemm(nq, r, nk, a.data(), aqs, aks, b.data(), ldb, c.data(), ldc, accumulate);
                            for (std::size_t q = 0; q < nq; ++q)
                            {
                                for (std::size_t l = 0; l < r; ++l)
                                {
                                    double ref = accumulate ? c0[q * ldc + l] : 0.0;
                                    for (std::size_t kk = 0; kk < nk; ++kk)
                                        ref += a[q * aqs + kk * aks] * b[kk * ldb + l];
                                    CHECK(std::abs(c[q * ldc + l] - ref) <= 1e-12 * (1.0 + nk));
                                }
                                // Padding between rows is untouched.
                                for (std::size_t l = r; l < ldc; ++l)
                                    CHECK(c[q * ldc + l] == c0[q * ldc + l]);
                            }
                        }
    }
}

TEST_CASE("complex kernels agree with std::complex arithmetic")
{
    std::mt19937_64 rng(3);
    for (const KernelTable *k : variants())
    {
        CAPTURE(to_string(k->isa));
        for (std::size_t n : kLengths)
        {
            CAPTURE(n);
            const auto x = crandn(n, rng);
            const auto y = crandn(n, rng);
            cdouble ref = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                ref += std::conj(x[i]) * y[i];
            CHECK(std::abs(k->cdotc(x.data(), y.data(), n) - ref) <= 1e-12 * (1.0 + n));

            const cdouble a(0.3, -1.7);
            auto z = y;
            k->caxpy(a, x.data(), z.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(z[i] - (y[i] + a * x[i])) <= 1e-14 * (1.0 + std::abs(z[i])));
        }
    }
}
