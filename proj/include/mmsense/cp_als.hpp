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

#ifndef MMSENSE_CP_ALS_HPP
#define MMSENSE_CP_ALS_HPP

// Canonical polyadic (CP) decomposition of real third-order tensors by
// alternating least squares:
//
//   t ~ sum_l lambda[l] * x_l o y_l o z_l
//
// with unit-norm factor columns and nonnegative weights sorted in
// descending order. The sorted weight vector is what the feature pipeline
// consumes.

#include "mmsense/tensor.hpp"

#include <cstdint>
#include <vector>

namespace mmsense
{

struct AlsConfig
{
    std::size_t rank = 10;
    std::size_t max_iters = 100;
    // Stop once |fit_prev - fit| / max(fit_prev, 1e-15) < rel_tol.
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-run record kept next to the model; serialized by the CLI.
struct AlsDiagnostics
{
    std::vector<double> fit_history; // relative fit error after each sweep
    std::size_t sweeps = 0;
    bool converged = false;
    bool zero_input = false;
    bool diverged = false;               // residual became NaN/Inf
    bool rank_exceeds_dimension = false; // rank > min(d1, d2, d3); allowed, but unusual
    std::size_t ridge_solves = 0;        // least-squares steps that needed a ridge
};

struct CpModel
{
    std::vector<double> lambda;
    RealMatrix x; // d1 x r
    RealMatrix y; // d2 x r
    RealMatrix z; // d3 x r
    AlsDiagnostics diagnostics;

    std::size_t rank() const { return lambda.size(); }
    Dims3 dims() const { return {x.rows(), y.rows(), z.rows()}; }
};

// Weak upper bound on tensor rank: min(d1*d2, d1*d3, d2*d3).
std::size_t rank_upper_bound(const Dims3 &dims);

// Requires 1 <= cfg.rank <= rank_upper_bound(t.dims()).
CpModel cp_als(const RealTensor3 &t, const AlsConfig &cfg);

RealTensor3 reconstruct(const CpModel &m);

// ||t - reconstruct(m)|| / ||t||, or the absolute residual when t == 0.
double fit_error(const CpModel &m, const RealTensor3 &t);

// Copy of lambda; throws InvariantError if it is not descending.
std::vector<double> sorted_weights(const CpModel &m);

} // namespace mmsense

#endif
