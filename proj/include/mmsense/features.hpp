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


#ifndef MMSENSE_FEATURES_HPP
#define MMSENSE_FEATURES_HPP

// Per-window features. A window g is T_w x F x M; G_m = g(:,:,m),
// G_f = g(:,f,:) and G_t = g(t,:,:) are its antenna, subcarrier and
// snapshot slices. Each slice gives an outer (G G^H) and inner (G^H G)
// correlation, six correlation tensors in all. Every correlation tensor
// yields five real tensors (amplitude and unwrapped phase normalised per
// slice, then real, imaginary and amplitude parts of the slice-normalised
// complex tensor); with |g| that makes 31 real tensors whose sorted CP
// weights are the features.

#include "mmsense/channel_sim.hpp"
#include "mmsense/cp_als.hpp"
#include "mmsense/tensor.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace mmsense
{

struct CorrelationSet
{
    ComplexTensor3 c_F_M;  // T_w x T_w x M, G_m G_m^H
    ComplexTensor3 c_Tw_M; // F x F x M,     G_m^H G_m
    ComplexTensor3 c_M_F;  // T_w x T_w x F, G_f G_f^H
    ComplexTensor3 c_Tw_F; // M x M x F,     G_f^H G_f
    ComplexTensor3 c_M_Tw; // F x F x T_w,   G_t G_t^H
    ComplexTensor3 c_F_Tw; // M x M x T_w,   G_t^H G_t
};

struct CorrelationPair
{
    ComplexTensor3 outer;
    ComplexTensor3 inner;
};

CorrelationPair corr_per_antenna(const ComplexTensor3 &g);
CorrelationPair corr_per_subcarrier(const ComplexTensor3 &g);
CorrelationPair corr_per_time(const ComplexTensor3 &g);
CorrelationSet correlations(const ComplexTensor3 &g);

struct AmpPhase
{
    RealTensor3 amplitude;
    RealTensor3 phase;
};

// 2-D unwrap of one column-major rows x cols slice of angles in place:
// every row left to right, then the first column top to bottom, with the
// first-column correction applied to its whole row. Jumps of more than pi
// are folded by multiples of 2 pi.
void unwrap_phase_slice(std::span<double> slice, std::size_t rows, std::size_t cols);

AmpPhase amp_phase_tensors(const ComplexTensor3 &c);

struct NormalizedParts
{
    RealTensor3 re;
    RealTensor3 im;
    RealTensor3 amp;
};

NormalizedParts normalized_complex(const ComplexTensor3 &c);

inline constexpr std::size_t kNumFeatureTensors = 31;

// Names of the 31 feature tensors in feature order: "abs_G", then
// "<corr>.<part>" with corr in C_F_M, C_Tw_M, C_M_F, C_Tw_F, C_M_Tw, C_F_Tw
// and part in A, P, Re, Im, NA.
const std::array<std::string, kNumFeatureTensors> &feature_tensor_names();

// The 31 real tensors of a window, in feature order.
std::vector<RealTensor3> feature_tensors(const ComplexTensor3 &g);

struct FeatureSet
{
    std::vector<std::vector<double>> lambdas; // 31 x r_max, each descending
    std::size_t window_id = 0;
    ActivityKind label = ActivityKind::A1Static;
    bool degenerate = false; // all-zero window
    bool invalid = false;    // some decomposition diverged
    std::string diagnostic;

    std::size_t r_max() const { return lambdas.empty() ? 0 : lambdas.front().size(); }
};

// CP of each feature tensor at rank min(als.rank, rank_upper_bound(dims)),
// zero-padded to als.rank. Tensor i is decomposed with seed
// derive_seed(als.seed, i).
FeatureSet extract_features(const ComplexTensor3 &g, const AlsConfig &als);

// Concatenated weights in feature order; with drop_largest the first
// (largest) weight of every vector is left out: 31 (r_max - 1) values.
std::vector<double> assemble_input(const FeatureSet &fs, bool drop_largest = true);

std::size_t input_dimension(std::size_t r_max, bool drop_largest = true);

} // namespace mmsense

#endif
