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


#ifndef MMSENSE_PREPROCESS_HPP
#define MMSENSE_PREPROCESS_HPP

// Frame-loss repair and time segmentation of T x F x M records.

#include "mmsense/channel_sim.hpp"
#include "mmsense/tensor.hpp"

#include <vector>

namespace mmsense
{

struct WindowedRecord
{
    std::vector<ComplexTensor3> windows; // each t_w x F x M
    ActivityKind label = ActivityKind::A1Static;
    std::size_t k_count = 0;             // floor(T / t_w)
};

// Fills every lost snapshot (mask[t] true) by linear interpolation between
// the nearest present snapshots, separately on real and imaginary parts.
// The first and last snapshots must be present.
ComplexTensor3 interpolate_lost_frames(const ComplexTensor3 &t, const std::vector<bool> &mask);

// Non-overlapping windows [k t_w, (k+1) t_w); the remainder is dropped.
WindowedRecord segment(const ComplexTensor3 &t, std::size_t t_w, ActivityKind label = ActivityKind::A1Static);

// Keeps the first `antennas` elements of the array.
ComplexTensor3 select_antennas(const ComplexTensor3 &t, std::size_t antennas);

} // namespace mmsense

#endif
