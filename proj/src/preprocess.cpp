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


#include "mmsense/preprocess.hpp"

#include "mmsense/error.hpp"

#include <algorithm>
#include <string>

namespace mmsense
{

ComplexTensor3 interpolate_lost_frames(const ComplexTensor3 &t, const std::vector<bool> &mask)
{
    const Dims3 d = t.dims();
    if (mask.size() != d.d1)
        throw ContractError("interpolate_lost_frames: mask length " + std::to_string(mask.size()) +
                            " does not match T = " + std::to_string(d.d1));
    if (mask.front() || mask.back())
        throw ContractError("interpolate_lost_frames: first and last snapshots must be present");

    ComplexTensor3 out = t;
    std::size_t prev = 0;
    for (std::size_t s = 1; s < d.d1; ++s)
    {
        if (mask[s])
            continue;
        // Lost run (prev, s).
        if (s > prev + 1)
        {
            const double span = double(s - prev);
            for (std::size_t m = 0; m < d.d3; ++m)
                for (std::size_t f = 0; f < d.d2; ++f)
                {
                    const cdouble a = t(prev, f, m);
                    const cdouble b = t(s, f, m);
                    for (std::size_t u = prev + 1; u < s; ++u)
                    {
                        const double w = double(u - prev) / span;
                        out(u, f, m) = cdouble(a.real() + w * (b.real() - a.real()),
                                               a.imag() + w * (b.imag() - a.imag()));
                    }
                }
        }
        prev = s;
    }
    return out;
}

WindowedRecord segment(const ComplexTensor3 &t, std::size_t t_w, ActivityKind label)
{
    const Dims3 d = t.dims();
    if (t_w == 0 || t_w > d.d1)
        throw ContractError("segment: window length " + std::to_string(t_w) + " outside [1, " +
                            std::to_string(d.d1) + "]");
    WindowedRecord rec;
    rec.label = label;
    rec.k_count = d.d1 / t_w;
    rec.windows.reserve(rec.k_count);
    for (std::size_t k = 0; k < rec.k_count; ++k)
    {
        ComplexTensor3 w({t_w, d.d2, d.d3});
        for (std::size_t m = 0; m < d.d3; ++m)
            for (std::size_t f = 0; f < d.d2; ++f)
            {
                const cdouble *src = &t(k * t_w, f, m);
                std::copy(src, src + t_w, &w(0, f, m));
            }
        rec.windows.push_back(std::move(w));
    }
    return rec;
}

ComplexTensor3 select_antennas(const ComplexTensor3 &t, std::size_t antennas)
{
    const Dims3 d = t.dims();
    if (antennas == 0 || antennas > d.d3)
        throw ContractError("select_antennas: " + std::to_string(antennas) + " outside [1, " +
                            std::to_string(d.d3) + "]");
    const auto src = t.data();
    return ComplexTensor3({d.d1, d.d2, antennas},
                          std::vector<cdouble>(src.begin(), src.begin() + std::ptrdiff_t(d.d1 * d.d2 * antennas)));
}

} // namespace mmsense
