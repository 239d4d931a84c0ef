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

#include "mmsense/tensor.hpp"

#include "mmsense/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace mmsense
{

std::string to_string(const Dims3 &dims)
{
    return "(" + std::to_string(dims.d1) + "," + std::to_string(dims.d2) + "," + std::to_string(dims.d3) + ")";
}

namespace
{

void check_mode(int mode)
{
    if (mode < 1 || mode > 3)
        throw ContractError("unfold/fold: mode must be 1, 2 or 3, got " + std::to_string(mode));
}

// Row and column of entry (i,j,k) in the mode-n unfolding.
inline std::pair<std::size_t, std::size_t> unfold_index(int mode, const Dims3 &d, std::size_t i, std::size_t j,
                                                        std::size_t k)
{
    switch (mode)
    {
    case 1:
        return {i, j + k * d.d2};
    case 2:
        return {j, i + k * d.d1};
    default:
        return {k, i + j * d.d1};
    }
}

std::pair<std::size_t, std::size_t> unfold_shape(int mode, const Dims3 &d)
{
    switch (mode)
    {
    case 1:
        return {d.d1, d.d2 * d.d3};
    case 2:
        return {d.d2, d.d1 * d.d3};
    default:
        return {d.d3, d.d1 * d.d2};
    }
}

template <class T>
double frobenius_impl(std::span<const T> values)
{
    if constexpr (std::is_same_v<T, double>)
    {
        return std::sqrt(simd::active().sum_squares(values.data(), values.size()));
    }
    else
    {
        const auto *flat = reinterpret_cast<const double *>(values.data());
        return std::sqrt(simd::active().sum_squares(flat, 2 * values.size()));
    }
}

template <class T>
Matrix<T> hadamard_impl(const Matrix<T> &a, const Matrix<T> &b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("hadamard: shape mismatch");
    Matrix<T> out(a.rows(), a.cols());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t n = 0; n < o.size(); ++n)
        o[n] = x[n] * y[n];
    return out;
}

} // namespace

RealMatrix unfold(const RealTensor3 &t, int mode)
{
    check_mode(mode);
    const Dims3 &d = t.dims();
    const auto [rows, cols] = unfold_shape(mode, d);
    RealMatrix m(rows, cols);
    if (mode == 1)
    {
        // Mode-1 unfolding is the linearization itself.
        std::copy(t.data().begin(), t.data().end(), m.data().begin());
        return m;
    }
    for (std::size_t k = 0; k < d.d3; ++k)
        for (std::size_t j = 0; j < d.d2; ++j)
            for (std::size_t i = 0; i < d.d1; ++i)
            {
                const auto [r, c] = unfold_index(mode, d, i, j, k);
                m(r, c) = t(i, j, k);
            }
    return m;
}

RealTensor3 fold(const RealMatrix &m, int mode, Dims3 dims)
{
    check_mode(mode);
    const auto [rows, cols] = unfold_shape(mode, dims);
    if (m.rows() != rows || m.cols() != cols)
        throw ContractError("fold: matrix shape does not match mode-" + std::to_string(mode) + " unfolding of " +
                            to_string(dims));
    RealTensor3 t(dims);
    for (std::size_t k = 0; k < dims.d3; ++k)
        for (std::size_t j = 0; j < dims.d2; ++j)
            for (std::size_t i = 0; i < dims.d1; ++i)
            {
                const auto [r, c] = unfold_index(mode, dims, i, j, k);
                t(i, j, k) = m(r, c);
            }
    return t;
}

double frobenius_norm(const RealMatrix &m) { return frobenius_impl<double>(m.data()); }
double frobenius_norm(const ComplexMatrix &m) { return frobenius_impl<cdouble>(m.data()); }
double frobenius_norm(const RealTensor3 &t) { return frobenius_impl<double>(t.data()); }
double frobenius_norm(const ComplexTensor3 &t) { return frobenius_impl<cdouble>(t.data()); }

RealMatrix hadamard(const RealMatrix &a, const RealMatrix &b) { return hadamard_impl(a, b); }
ComplexMatrix hadamard(const ComplexMatrix &a, const ComplexMatrix &b) { return hadamard_impl(a, b); }

RealMatrix khatri_rao(const RealMatrix &a, const RealMatrix &b)
{
    if (a.cols() != b.cols())
        throw ContractError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.cols()) + ")");
    RealMatrix out(a.rows() * b.rows(), a.cols());
    for (std::size_t l = 0; l < a.cols(); ++l)
        for (std::size_t ia = 0; ia < a.rows(); ++ia)
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                out(ia * b.rows() + ib, l) = a(ia, l) * b(ib, l);
    return out;
}

RealMatrix gram(const RealMatrix &a)
{
    const auto &k = simd::active();
    RealMatrix g(a.cols(), a.cols());
    for (std::size_t p = 0; p < a.cols(); ++p)
        for (std::size_t q = p; q < a.cols(); ++q)
        {
            const double v = k.dot(a.col(p).data(), a.col(q).data(), a.rows());
            g(p, q) = v;
            g(q, p) = v;
        }
    return g;
}

RealTensor3 abs(const ComplexTensor3 &t)
{
    RealTensor3 out(t.dims());
    auto o = out.data();
    auto x = t.data();
    for (std::size_t n = 0; n < o.size(); ++n)
        o[n] = std::abs(x[n]);
    return out;
}

RealTensor3 subtract(const RealTensor3 &a, const RealTensor3 &b)
{
    if (a.dims() != b.dims())
        throw ContractError("subtract: dims mismatch " + to_string(a.dims()) + " vs " + to_string(b.dims()));
    RealTensor3 out(a.dims());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t n = 0; n < o.size(); ++n)
        o[n] = x[n] - y[n];
    return out;
}

RealTensor3 scale(const RealTensor3 &t, double alpha)
{
    RealTensor3 out(t.dims());
    auto o = out.data();
    auto x = t.data();
    for (std::size_t n = 0; n < o.size(); ++n)
        o[n] = alpha * x[n];
    return out;
}

bool all_finite(std::span<const double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

bool all_finite(std::span<const cdouble> values)
{
    return std::all_of(values.begin(), values.end(),
                       [](const cdouble &v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

} // namespace mmsense
