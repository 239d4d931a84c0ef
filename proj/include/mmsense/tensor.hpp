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

#ifndef MMSENSE_TENSOR_HPP
#define MMSENSE_TENSOR_HPP

#include "mmsense/error.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mmsense
{

using cdouble = std::complex<double>;

struct Dims3
{
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    std::size_t d3 = 0;

    constexpr std::size_t size() const { return d1 * d2 * d3; }
    constexpr std::size_t operator[](int mode) const { return mode == 1 ? d1 : (mode == 2 ? d2 : d3); }
    friend constexpr bool operator==(const Dims3 &, const Dims3 &) = default;
};

std::string to_string(const Dims3 &dims);

// Dense third-order tensor. Linearization is first-index-fastest:
// (i, j, k) -> i + j*d1 + k*d1*d2. Every other layout in the library
// (unfoldings, Khatri-Rao row order, file payloads) derives from this one.
template <class T>
class Tensor3
{
public:
    using value_type = T;

    Tensor3() = default;

    explicit Tensor3(Dims3 dims)
        : dims_(dims), data_(dims.size(), T{})
    {
        check_dims(dims);
    }

    Tensor3(Dims3 dims, std::vector<T> data)
        : dims_(dims), data_(std::move(data))
    {
        check_dims(dims);
        if (data_.size() != dims_.size())
            throw ContractError("Tensor3: data length " + std::to_string(data_.size()) +
                                " does not match dims " + to_string(dims_));
    }

    const Dims3 &dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const
    {
        return i + dims_.d1 * (j + dims_.d2 * k);
    }

    T &operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[offset(i, j, k)]; }
    const T &operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[offset(i, j, k)]; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    const std::vector<T> &values() const { return data_; }

    // Contiguous mode-1 fiber t(:, j, k).
    std::span<const T> fiber(std::size_t j, std::size_t k) const
    {
        return std::span<const T>(data_).subspan(offset(0, j, k), dims_.d1);
    }

    // Contiguous frontal slice t(:, :, k), d1 x d2, first index fastest.
    std::span<const T> slice(std::size_t k) const
    {
        return std::span<const T>(data_).subspan(k * dims_.d1 * dims_.d2, dims_.d1 * dims_.d2);
    }
    std::span<T> slice(std::size_t k)
    {
        return std::span<T>(data_).subspan(k * dims_.d1 * dims_.d2, dims_.d1 * dims_.d2);
    }

    friend bool operator==(const Tensor3 &, const Tensor3 &) = default;

private:
    static void check_dims(const Dims3 &dims)
    {
        if (dims.d1 == 0 || dims.d2 == 0 || dims.d3 == 0)
            throw ContractError("Tensor3: all dims must be positive, got " + to_string(dims));
    }

    Dims3 dims_{};
    std::vector<T> data_;
};

using RealTensor3 = Tensor3<double>;
using ComplexTensor3 = Tensor3<cdouble>;

// Dense matrix stored column-major (row index fastest), matching the tensor
// linearization so that frontal slices and unfoldings are plain copies.
template <class T>
class Matrix
{
public:
    using value_type = T;

    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, T{})
    {
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_)
            throw ContractError("Matrix: data length does not match shape");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T &operator()(std::size_t r, std::size_t c) { return data_[r + rows_ * c]; }
    const T &operator()(std::size_t r, std::size_t c) const { return data_[r + rows_ * c]; }

    std::span<T> col(std::size_t c) { return std::span<T>(data_).subspan(c * rows_, rows_); }
    std::span<const T> col(std::size_t c) const { return std::span<const T>(data_).subspan(c * rows_, rows_); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    friend bool operator==(const Matrix &, const Matrix &) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cdouble>;

// Mode-n unfolding (n in {1,2,3}).
//   mode 1: d1 x (d2*d3), column j + k*d2
//   mode 2: d2 x (d1*d3), column i + k*d1
//   mode 3: d3 x (d1*d2), column i + j*d1
RealMatrix unfold(const RealTensor3 &t, int mode);

// Inverse of unfold.
RealTensor3 fold(const RealMatrix &m, int mode, Dims3 dims);

double frobenius_norm(const RealMatrix &m);
double frobenius_norm(const ComplexMatrix &m);
double frobenius_norm(const RealTensor3 &t);
double frobenius_norm(const ComplexTensor3 &t);

RealMatrix hadamard(const RealMatrix &a, const RealMatrix &b);
ComplexMatrix hadamard(const ComplexMatrix &a, const ComplexMatrix &b);

// Column-wise Kronecker product; row index of the result is ia*b.rows() + ib.
RealMatrix khatri_rao(const RealMatrix &a, const RealMatrix &b);

// A^T A for a real matrix.
RealMatrix gram(const RealMatrix &a);

RealTensor3 abs(const ComplexTensor3 &t);
RealTensor3 subtract(const RealTensor3 &a, const RealTensor3 &b);
RealTensor3 scale(const RealTensor3 &t, double alpha);

bool all_finite(std::span<const double> values);
bool all_finite(std::span<const cdouble> values);

} // namespace mmsense

#endif
