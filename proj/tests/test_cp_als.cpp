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

#include "mmsense/cp_als.hpp"

#include <algorithm>

using namespace mmsense;

namespace
{

struct Planted
{
    std::vector<double> lambda;
    RealMatrix x, y, z;
    RealTensor3 t;
};

Planted planted(Dims3 d, std::vector<double> lambda, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Planted p;
    p.lambda = std::move(lambda);
    const std::size_t r = p.lambda.size();
    p.x = oracle::random_unit_columns(d.d1, r, rng);
    p.y = oracle::random_unit_columns(d.d2, r, rng);
    p.z = oracle::random_unit_columns(d.d3, r, rng);
    p.t = oracle::cp_tensor(p.lambda, p.x, p.y, p.z);
    return p;
}

AlsConfig config(std::size_t rank, std::size_t iters, double tol, std::uint64_t seed = 1)
{
    AlsConfig c;
    c.rank = rank;
    c.max_iters = iters;
    c.rel_tol = tol;
    c.seed = seed;
    return c;
}

bool descending(const std::vector<double> &v)
{
    return std::is_sorted(v.begin(), v.end(), std::greater<>());
}

void check_unit_columns(const RealMatrix &m)
{
    for (std::size_t l = 0; l < m.cols(); ++l)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            s += m(i, l) * m(i, l);
        CHECK(std::abs(std::sqrt(s) - 1.0) <= 1e-9);
    }
}

} // namespace

TEST_CASE("rank_upper_bound")
{
    CHECK(rank_upper_bound({200, 100, 100}) == 10000);
    CHECK(rank_upper_bound({1, 1, 1}) == 1);
    CHECK(rank_upper_bound({2, 3, 4}) == 6);
}

TEST_CASE("exact rank-one tensor is recovered")
{
    const Planted p = planted({5, 6, 7}, {7.0}, 10);
    const CpModel m = cp_als(p.t, config(1, 100, 1e-12));
    CHECK(std::abs(m.lambda[0] - 7.0) <= 1e-6);
    CHECK(fit_error(m, p.t) < 1e-8);
    check_unit_columns(m.x);
    check_unit_columns(m.y);
    check_unit_columns(m.z);
}

TEST_CASE("planted rank-3 tensor is recovered")
{
    const Planted p = planted({8, 9, 10}, {5.0, 3.0, 1.0}, 20);
    const CpModel m = cp_als(p.t, config(3, 500, 1e-10));
    CHECK(fit_error(m, p.t) < 1e-6);
    const auto w = sorted_weights(m);
    REQUIRE(w.size() == 3);
    CHECK(std::abs(w[0] - 5.0) <= 1e-4);
    CHECK(std::abs(w[1] - 3.0) <= 1e-4);
    CHECK(std::abs(w[2] - 1.0) <= 1e-4);
    CHECK(descending(w));
    check_unit_columns(m.x);
    check_unit_columns(m.y);
    check_unit_columns(m.z);

    const RealTensor3 back = reconstruct(m);
    CHECK(oracle::frobenius_loop(subtract(back, p.t)) <= 1e-6 * oracle::frobenius_loop(p.t));

    // A rank-1 fit of the same tensor is strictly worse.
    const CpModel m1 = cp_als(p.t, config(1, 200, 1e-10));
    CHECK(fit_error(m1, p.t) > fit_error(m, p.t));
}

TEST_CASE("ALS residuals never increase")
{
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 10; ++trial)
    {
        const RealTensor3 t = oracle::random_real({6, 7, 5}, rng);
        const CpModel m = cp_als(t, config(4, 60, 1e-14, trial));
        const auto &h = m.diagnostics.fit_history;
        REQUIRE(h.size() >= 2);
        for (std::size_t s = 1; s < h.size(); ++s)
            CHECK(h[s] <= h[s - 1] + 1e-10);
        // The recorded value matches an explicit residual.
        CHECK(std::abs(h.back() - fit_error(m, t)) <= 1e-10);
    }
}

TEST_CASE("reconstruct matches the summation oracle")
{
    CpModel one;
    one.lambda = {1.0};
    one.x = RealMatrix(1, 1, {1.0});
    one.y = RealMatrix(1, 1, {1.0});
    one.z = RealMatrix(1, 1, {1.0});
    CHECK(reconstruct(one)(0, 0, 0) == 1.0);

    CpModel two;
    two.lambda = {2.0, 3.0};
    two.x = RealMatrix(2, 2, {1.0, 0.5, -1.0, 2.0});
    two.y = RealMatrix(2, 2, {0.25, 1.0, 4.0, -0.5});
    two.z = RealMatrix(2, 2, {1.0, 2.0, 0.5, 1.0});
    const RealTensor3 ref = oracle::cp_tensor(two.lambda, two.x, two.y, two.z);
    CHECK(reconstruct(two) == ref);
}

TEST_CASE("fit_error edge cases")
{
    const Planted p = planted({3, 4, 5}, {2.0, 1.0}, 4);
    CpModel exact;
    exact.lambda = p.lambda;
    exact.x = p.x;
    exact.y = p.y;
    exact.z = p.z;
    CHECK(fit_error(exact, p.t) <= 1e-12);

    CpModel zero = exact;
    zero.lambda = {0.0, 0.0};
    CHECK(fit_error(zero, p.t) == 1.0);

    CHECK_THROWS_AS(fit_error(exact, RealTensor3({3, 4, 6})), ContractError);
}

TEST_CASE("sorted_weights keeps ties and rejects unsorted models")
{
    CpModel m;
    m.lambda = {3.0, 3.0, 1.0};
    CHECK(sorted_weights(m) == std::vector<double>{3.0, 3.0, 1.0});
    m.lambda = {1.0, 3.0};
    CHECK_THROWS_AS(sorted_weights(m), InvariantError);
}

TEST_CASE("all-zero input yields zero weights and a diagnostic")
{
    const CpModel m = cp_als(RealTensor3({3, 3, 3}), config(2, 10, 1e-6));
    CHECK(m.diagnostics.zero_input);
    CHECK(m.lambda == std::vector<double>{0.0, 0.0});
    check_unit_columns(m.x);
}

TEST_CASE("rank above the weak bound is a contract violation; above a dimension only a diagnostic")
{
    CHECK_THROWS_AS(cp_als(RealTensor3({2, 2, 2}), config(5, 10, 1e-6)), ContractError);
    std::mt19937_64 rng(1);
    const RealTensor3 t = oracle::random_real({2, 3, 4}, rng);
    const CpModel m = cp_als(t, config(3, 20, 1e-8));
    CHECK(m.diagnostics.rank_exceeds_dimension);
    CHECK(m.rank() == 3);
}

TEST_CASE("invalid configs are rejected")
{
    RealTensor3 t({2, 2, 2});
    CHECK_THROWS_AS(cp_als(t, config(0, 10, 1e-6)), ValidationError);
    CHECK_THROWS_AS(cp_als(t, config(1, 0, 1e-6)), ValidationError);
    CHECK_THROWS_AS(cp_als(t, config(1, 10, 0.0)), ValidationError);
}

TEST_CASE("seeded determinism")
{
    std::mt19937_64 rng(9);
    const RealTensor3 t = oracle::random_real({5, 6, 7}, rng);
    const CpModel a = cp_als(t, config(3, 30, 1e-9, 77));
    const CpModel b = cp_als(t, config(3, 30, 1e-9, 77));
    CHECK(a.lambda == b.lambda);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.z == b.z);
    CHECK(a.diagnostics.fit_history == b.diagnostics.fit_history);
}

TEST_CASE("scale equivariance")
{
    std::mt19937_64 rng(12);
    for (double alpha : {0.01, 3.0, 250.0})
    {
        const RealTensor3 t = oracle::random_real({6, 5, 4}, rng);
        const CpModel a = cp_als(t, config(3, 100, 1e-9, 5));
        const CpModel b = cp_als(scale(t, alpha), config(3, 100, 1e-9, 5));
        const auto wa = sorted_weights(a);
        const auto wb = sorted_weights(b);
        for (std::size_t l = 0; l < wa.size(); ++l)
            CHECK(std::abs(wb[l] - alpha * wa[l]) <= 1e-6 * alpha * wa[l]);
        CHECK(std::abs(fit_error(a, t) - fit_error(b, scale(t, alpha))) <= 1e-8);
    }
}

TEST_CASE("sorted weights are invariant to permuting a mode")
{
    const Planted p = planted({6, 7, 8}, {4.0, 2.0, 1.5}, 40);
    const CpModel base = cp_als(p.t, config(3, 500, 1e-12));
    const auto w0 = sorted_weights(base);

    std::mt19937_64 rng(41);
    for (int mode = 1; mode <= 3; ++mode)
    {
        const Dims3 d = p.t.dims();
        std::vector<std::size_t> perm(d[mode]);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        RealTensor3 q(d);
        for (std::size_t i = 0; i < d.d1; ++i)
            for (std::size_t j = 0; j < d.d2; ++j)
                for (std::size_t k = 0; k < d.d3; ++k)
                {
                    const std::size_t pi = mode == 1 ? perm[i] : i;
                    const std::size_t pj = mode == 2 ? perm[j] : j;
                    const std::size_t pk = mode == 3 ? perm[k] : k;
                    q(i, j, k) = p.t(pi, pj, pk);
                }
        const auto w = sorted_weights(cp_als(q, config(3, 500, 1e-12)));
        for (std::size_t l = 0; l < 3; ++l)
            CHECK(std::abs(w[l] - w0[l]) <= 1e-6);
    }
}
