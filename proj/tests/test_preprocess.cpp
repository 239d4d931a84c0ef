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


#include "doctest.h"
#include "oracles.hpp"

#include "mmsense/preprocess.hpp"

using namespace mmsense;

namespace
{

std::vector<bool> random_interior_mask(std::size_t T, double p, std::mt19937_64 &rng)
{
    std::bernoulli_distribution lost(p);
    std::vector<bool> mask(T, false);
    for (std::size_t t = 1; t + 1 < T; ++t)
        mask[t] = lost(rng);
    return mask;
}

// Two-point line through the nearest present neighbours, one series at a time.
ComplexTensor3 interpolate_oracle(const ComplexTensor3 &t, const std::vector<bool> &mask)
{
    const Dims3 d = t.dims();
    ComplexTensor3 out = t;
    for (std::size_t m = 0; m < d.d3; ++m)
        for (std::size_t f = 0; f < d.d2; ++f)
            for (std::size_t s = 0; s < d.d1; ++s)
            {
                if (!mask[s])
                    continue;
                std::size_t lo = s, hi = s;
                while (mask[lo])
                    --lo;
                while (mask[hi])
                    ++hi;
                const double x0 = double(lo), x1 = double(hi), x = double(s);
                const double re = t(lo, f, m).real() + (t(hi, f, m).real() - t(lo, f, m).real()) * (x - x0) / (x1 - x0);
                const double im = t(lo, f, m).imag() + (t(hi, f, m).imag() - t(lo, f, m).imag()) * (x - x0) / (x1 - x0);
                out(s, f, m) = {re, im};
            }
    return out;
}

} // namespace

TEST_CASE("interpolation examples")
{
    std::mt19937_64 rng(1);
    const ComplexTensor3 g = oracle::random_complex({12, 3, 4}, rng);
    CHECK(interpolate_lost_frames(g, std::vector<bool>(12, false)) == g);

    ComplexTensor3 line({3, 1, 1}, {cdouble(1, 1), cdouble(-7, 4), cdouble(3, 3)});
    const ComplexTensor3 mid = interpolate_lost_frames(line, {false, true, false});
    CHECK(mid(1, 0, 0) == cdouble(2, 2));
    CHECK(mid(0, 0, 0) == cdouble(1, 1));
    CHECK(mid(2, 0, 0) == cdouble(3, 3));
}

TEST_CASE("interpolation matches the per-series oracle")
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial)
    {
        const ComplexTensor3 g = oracle::random_complex({40, 3, 5}, rng);
        const auto mask = random_interior_mask(40, 0.3, rng);
        const ComplexTensor3 got = interpolate_lost_frames(g, mask);
        CHECK(oracle::max_abs_diff(got, interpolate_oracle(g, mask)) <= 1e-12);
        // Idempotent under the same mask.
        CHECK(interpolate_lost_frames(got, mask) == got);
    }
}

TEST_CASE("interpolation contract")
{
    ComplexTensor3 g({4, 1, 1});
    CHECK_THROWS_AS(interpolate_lost_frames(g, {true, false, false, false}), ContractError);
    CHECK_THROWS_AS(interpolate_lost_frames(g, {false, false, false, true}), ContractError);
    CHECK_THROWS_AS(interpolate_lost_frames(g, {false, false, false}), ContractError);
}

TEST_CASE("segmentation")
{
    std::mt19937_64 rng(3);
    {
        const ComplexTensor3 g = oracle::random_complex({3000, 1, 2}, rng);
        const WindowedRecord w = segment(g, 200, ActivityKind::A2Periodic);
        CHECK(w.k_count == 15);
        CHECK(w.windows.size() == 15);
        CHECK(w.label == ActivityKind::A2Periodic);
    }
    {
        const ComplexTensor3 g = oracle::random_complex({9, 2, 3}, rng);
        const WindowedRecord w = segment(g, 9);
        REQUIRE(w.windows.size() == 1);
        CHECK(w.windows[0] == g);
    }
    {
        const ComplexTensor3 g = oracle::random_complex({7, 2, 3}, rng);
        const WindowedRecord w = segment(g, 3);
        REQUIRE(w.k_count == 2);
        // Concatenation reproduces snapshots 0..5; snapshot 6 is dropped.
        for (std::size_t k = 0; k < 2; ++k)
        {
            CHECK(w.windows[k].dims() == Dims3{3, 2, 3});
            for (std::size_t t = 0; t < 3; ++t)
                for (std::size_t f = 0; f < 2; ++f)
                    for (std::size_t m = 0; m < 3; ++m)
                        CHECK(w.windows[k](t, f, m) == g(k * 3 + t, f, m));
        }
    }
    CHECK_THROWS_AS(segment(ComplexTensor3({5, 1, 1}), 6), ContractError);
    CHECK_THROWS_AS(segment(ComplexTensor3({5, 1, 1}), 0), ContractError);
}

TEST_CASE("segmentation partitions random records")
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial)
    {
        const Dims3 d = oracle::random_dims(rng, 30);
        std::uniform_int_distribution<std::size_t> pick(1, d.d1);
        const std::size_t tw = pick(rng);
        const ComplexTensor3 g = oracle::random_complex(d, rng);
        const WindowedRecord w = segment(g, tw);
        CHECK(w.k_count == d.d1 / tw);
        for (std::size_t k = 0; k < w.k_count; ++k)
            for (std::size_t t = 0; t < tw; ++t)
                for (std::size_t f = 0; f < d.d2; ++f)
                    for (std::size_t m = 0; m < d.d3; ++m)
                        CHECK(w.windows[k](t, f, m) == g(k * tw + t, f, m));
    }
}

TEST_CASE("segmentation commutes with interpolation away from window edges")
{
    std::mt19937_64 rng(5);
    const ComplexTensor3 g = oracle::random_complex({60, 2, 2}, rng);
    // Windows of 20; losses only in snapshots 5..14 and 25..34 of each block,
    // so every lost run is bracketed inside its own window.
    std::vector<bool> mask(60, false);
    for (std::size_t t : {6u, 7u, 11u, 27u, 28u, 29u, 33u, 46u})
        mask[t] = true;
    ComplexTensor3 zeroed = g;
    for (std::size_t t = 0; t < 60; ++t)
        if (mask[t])
            for (std::size_t f = 0; f < 2; ++f)
                for (std::size_t m = 0; m < 2; ++m)
                    zeroed(t, f, m) = 0.0;

    const WindowedRecord whole = segment(interpolate_lost_frames(zeroed, mask), 20);
    const WindowedRecord parts = segment(zeroed, 20);
    for (std::size_t k = 0; k < 3; ++k)
    {
        const std::vector<bool> sub(mask.begin() + std::ptrdiff_t(k * 20), mask.begin() + std::ptrdiff_t(k * 20 + 20));
        CHECK(interpolate_lost_frames(parts.windows[k], sub) == whole.windows[k]);
    }
}

TEST_CASE("antenna selection keeps the leading elements")
{
    std::mt19937_64 rng(6);
    const ComplexTensor3 g = oracle::random_complex({4, 3, 10}, rng);
    const ComplexTensor3 s = select_antennas(g, 4);
    CHECK(s.dims() == Dims3{4, 3, 4});
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t f = 0; f < 3; ++f)
            for (std::size_t m = 0; m < 4; ++m)
                CHECK(s(t, f, m) == g(t, f, m));
    CHECK(select_antennas(g, 10) == g);
    CHECK_THROWS_AS(select_antennas(g, 11), ContractError);
}
