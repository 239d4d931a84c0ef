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

#include "mmsense/cp_als.hpp"

#include "mmsense/random.hpp"
#include "mmsense/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmsense
{

void AlsConfig::validate() const
{
    if (rank < 1)
        throw ValidationError("AlsConfig: rank must be >= 1");
    if (max_iters < 1)
        throw ValidationError("AlsConfig: max_iters must be >= 1");
    if (!(rel_tol > 0.0))
        throw ValidationError("AlsConfig: rel_tol must be > 0");
}

std::size_t rank_upper_bound(const Dims3 &d)
{
    return std::min({d.d1 * d.d2, d.d1 * d.d3, d.d2 * d.d3});
}

namespace
{

RealMatrix random_unit_columns(std::size_t rows, std::size_t cols, Rng &rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    RealMatrix m(rows, cols);
    for (std::size_t l = 0; l < cols; ++l)
    {
        auto c = m.col(l);
        double n2 = 0.0;
        // A draw of all zeros is astronomically unlikely but would break
        // normalization, so redraw.
        while (n2 == 0.0)
        {
            for (auto &v : c)
                v = normal(rng);
            n2 = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (auto &v : c)
            v *= inv;
    }
    return m;
}

// Cholesky factor of g in place (lower triangle). False if a pivot is not
// comfortably positive.
bool cholesky(RealMatrix &g)
{
    const std::size_t r = g.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        max_diag = std::max(max_diag, g(i, i));
    const double floor = 1e-12 * max_diag;
    for (std::size_t j = 0; j < r; ++j)
    {
        double d = g(j, j);
        for (std::size_t p = 0; p < j; ++p)
            d -= g(j, p) * g(j, p);
        if (!(d > floor))
            return false;
        const double ljj = std::sqrt(d);
        g(j, j) = ljj;
        for (std::size_t i = j + 1; i < r; ++i)
        {
            double s = g(i, j);
            for (std::size_t p = 0; p < j; ++p)
                s -= g(i, p) * g(j, p);
            g(i, j) = s / ljj;
        }
    }
    return true;
}

// Solves A * G = B for A (G symmetric positive definite, r x r). B is n x r
// and is overwritten with A. Adds a ridge to G if the plain factorization
// fails; returns true when that happened.
bool solve_right_spd(RealMatrix &b, RealMatrix g)
{
    const auto &k = simd::active();
    const std::size_t r = g.rows();
    const std::size_t n = b.rows();

    bool ridged = false;
    RealMatrix factor = g;
    if (!cholesky(factor))
    {
        ridged = true;
        double trace = 0.0;
        for (std::size_t i = 0; i < r; ++i)
            trace += g(i, i);
        double eps = 1e-10 * (trace > 0.0 ? trace : 1.0);
        for (int attempt = 0;; ++attempt)
        {
            factor = g;
            for (std::size_t i = 0; i < r; ++i)
                factor(i, i) += eps;
            if (cholesky(factor))
                break;
            if (attempt == 12)
                throw NumericError("cp_als: normal equations are not positive definite even with ridge");
            eps *= 10.0;
        }
    }

    // A L L^T = B. Forward: W L^T = B, column by column.
    for (std::size_t q = 0; q < r; ++q)
    {
        double *wq = b.col(q).data();
        for (std::size_t p = 0; p < q; ++p)
            k.axpy(-factor(q, p), b.col(p).data(), wq, n);
        const double inv = 1.0 / factor(q, q);
        for (std::size_t i = 0; i < n; ++i)
            wq[i] *= inv;
    }
    // Backward: A L = W.
    for (std::size_t qq = r; qq-- > 0;)
    {
        double *aq = b.col(qq).data();
        for (std::size_t p = qq + 1; p < r; ++p)
            k.axpy(-factor(p, qq), b.col(p).data(), aq, n);
        const double inv = 1.0 / factor(qq, qq);
        for (std::size_t i = 0; i < n; ++i)
            aq[i] *= inv;
    }
    return ridged;
}

// Moves column norms of `a` into lambda and stores the unit columns in
// `factor`. A zero column keeps the previous direction with weight 0.
void normalize_into(const RealMatrix &a, RealMatrix &factor, std::vector<double> &lambda)
{
    const auto &k = simd::active();
    for (std::size_t l = 0; l < a.cols(); ++l)
    {
        const auto src = a.col(l);
        const double nrm = std::sqrt(k.sum_squares(src.data(), src.size()));
        if (nrm > 0.0 && std::isfinite(nrm))
        {
            auto dst = factor.col(l);
            const double inv = 1.0 / nrm;
            for (std::size_t i = 0; i < src.size(); ++i)
                dst[i] = src[i] * inv;
            lambda[l] = nrm;
        }
        else
        {
            lambda[l] = std::isfinite(nrm) ? 0.0 : nrm;
        }
    }
}

// Mode-1 MTTKRP: out(i,l) = sum_{j,k} t(i,j,k) * y(j,l) * z(k,l). One GEMM of
// the mode-1 unfolding against the row-major Khatri-Rao product.
RealMatrix mttkrp_mode1(const RealTensor3 &t, const RealMatrix &y, const RealMatrix &z,
                        std::vector<double> &scratch)
{
    const Dims3 &d = t.dims();
    const std::size_t r = y.cols();
    const std::size_t fibers = d.d2 * d.d3;
    scratch.resize(fibers * r + d.d1 * r);
    double *kr = scratch.data();
    double *rows = kr + fibers * r;
    for (std::size_t kk = 0; kk < d.d3; ++kk)
        for (std::size_t j = 0; j < d.d2; ++j)
            for (std::size_t l = 0; l < r; ++l)
                kr[(j + kk * d.d2) * r + l] = y(j, l) * z(kk, l);
    simd::active().gemm(d.d1, r, fibers, t.data().data(), 1, d.d1, kr, r, rows, r, false);
    RealMatrix out(d.d1, r);
    for (std::size_t i = 0; i < d.d1; ++i)
        for (std::size_t l = 0; l < r; ++l)
            out(i, l) = rows[i * r + l];
    return out;
}

// proj[(j + k*d2)*r + l] = x(:,l) . t(:,j,k). Shared by the mode-2 and mode-3
// updates, which both use the freshly updated x.
void project_fibers(const RealTensor3 &t, const RealMatrix &x, std::vector<double> &proj,
                    std::vector<double> &scratch)
{
    const Dims3 &d = t.dims();
    const std::size_t r = x.cols();
    scratch.resize(d.d1 * r);
    for (std::size_t i = 0; i < d.d1; ++i)
        for (std::size_t l = 0; l < r; ++l)
            scratch[i * r + l] = x(i, l);
    proj.resize(d.d2 * d.d3 * r);
    simd::active().gemm(d.d2 * d.d3, r, d.d1, t.data().data(), d.d1, 1, scratch.data(), r, proj.data(), r,
                        false);
}

RealTensor3 reconstruct_impl(const std::vector<double> &lambda, const RealMatrix &x, const RealMatrix &y,
                             const RealMatrix &z)
{
    const auto &k = simd::active();
    const Dims3 d{x.rows(), y.rows(), z.rows()};
    const std::size_t r = lambda.size();
    RealTensor3 out(d);
    std::vector<double> coef(r);
    for (std::size_t kk = 0; kk < d.d3; ++kk)
        for (std::size_t j = 0; j < d.d2; ++j)
        {
            for (std::size_t l = 0; l < r; ++l)
                coef[l] = lambda[l] * y(j, l) * z(kk, l);
            k.gemv_n(x.data().data(), d.d1, d.d1, r, coef.data(), &out(0, j, kk));
        }
    return out;
}

double exact_residual(const RealTensor3 &t, const std::vector<double> &lambda, const RealMatrix &x,
                      const RealMatrix &y, const RealMatrix &z)
{
    return frobenius_norm(subtract(t, reconstruct_impl(lambda, x, y, z)));
}

} // namespace

CpModel cp_als(const RealTensor3 &t, const AlsConfig &cfg)
{
    cfg.validate();
    const Dims3 d = t.dims();
    const std::size_t r = cfg.rank;
    if (r > rank_upper_bound(d))
        throw ContractError("cp_als: rank " + std::to_string(r) + " exceeds rank bound " +
                            std::to_string(rank_upper_bound(d)) + " of " + to_string(d));

    Rng rng = make_rng(cfg.seed, 0xA15);
    CpModel m;
    m.x = random_unit_columns(d.d1, r, rng);
    m.y = random_unit_columns(d.d2, r, rng);
    m.z = random_unit_columns(d.d3, r, rng);
    m.lambda.assign(r, 0.0);
    m.diagnostics.rank_exceeds_dimension = r > std::min({d.d1, d.d2, d.d3});

    const auto &k = simd::active();
    const double norm_t2 = k.sum_squares(t.data().data(), t.size());
    const double norm_t = std::sqrt(norm_t2);
    if (norm_t2 == 0.0)
    {
        m.diagnostics.zero_input = true;
        m.diagnostics.converged = true;
        return m;
    }

    std::vector<double> proj, scratch;
    double prev_fit = -1.0;
    for (std::size_t sweep = 0; sweep < cfg.max_iters; ++sweep)
    {
        // x
        {
            RealMatrix a = mttkrp_mode1(t, m.y, m.z, scratch);
            m.diagnostics.ridge_solves += solve_right_spd(a, hadamard(gram(m.y), gram(m.z)));
            normalize_into(a, m.x, m.lambda);
        }
        project_fibers(t, m.x, proj, scratch);
        // y
        {
            RealMatrix a(d.d2, r);
            for (std::size_t kk = 0; kk < d.d3; ++kk)
                for (std::size_t j = 0; j < d.d2; ++j)
                {
                    const double *p = &proj[(j + kk * d.d2) * r];
                    for (std::size_t l = 0; l < r; ++l)
                        a(j, l) += p[l] * m.z(kk, l);
                }
            m.diagnostics.ridge_solves += solve_right_spd(a, hadamard(gram(m.x), gram(m.z)));
            normalize_into(a, m.y, m.lambda);
        }
        // z
        RealMatrix mttkrp3(d.d3, r);
        for (std::size_t kk = 0; kk < d.d3; ++kk)
            for (std::size_t j = 0; j < d.d2; ++j)
            {
                const double *p = &proj[(j + kk * d.d2) * r];
                for (std::size_t l = 0; l < r; ++l)
                    mttkrp3(kk, l) += p[l] * m.y(j, l);
            }
        RealMatrix gxy = hadamard(gram(m.x), gram(m.y));
        RealMatrix a = mttkrp3;
        m.diagnostics.ridge_solves += solve_right_spd(a, gxy);
        normalize_into(a, m.z, m.lambda);

        // ||t - R||^2 = ||t||^2 - 2<t,R> + ||R||^2, with <t,R> read off the
        // mode-3 MTTKRP. Falls back to the explicit residual when the
        // identity would cancel catastrophically.
        double inner = 0.0;
        for (std::size_t l = 0; l < r; ++l)
            inner += k.dot(a.col(l).data(), mttkrp3.col(l).data(), d.d3);
        const RealMatrix gall = hadamard(gxy, gram(m.z));
        double norm_r2 = 0.0;
        for (std::size_t p = 0; p < r; ++p)
            for (std::size_t q = 0; q < r; ++q)
                norm_r2 += m.lambda[p] * m.lambda[q] * gall(p, q);
        double res2 = norm_t2 - 2.0 * inner + norm_r2;
        double fit;
        if (std::isfinite(res2) && res2 > 1e-6 * norm_t2)
            fit = std::sqrt(res2) / norm_t;
        else
            fit = exact_residual(t, m.lambda, m.x, m.y, m.z) / norm_t;

        m.diagnostics.fit_history.push_back(fit);
        m.diagnostics.sweeps = sweep + 1;
        if (!std::isfinite(fit))
        {
            m.diagnostics.diverged = true;
            break;
        }
        if (prev_fit >= 0.0 && std::abs(prev_fit - fit) / std::max(prev_fit, 1e-15) < cfg.rel_tol)
        {
            m.diagnostics.converged = true;
            break;
        }
        prev_fit = fit;
    }

    // Finalize: nonnegative weights, descending order.
    for (std::size_t l = 0; l < r; ++l)
        if (m.lambda[l] < 0.0)
        {
            m.lambda[l] = -m.lambda[l];
            for (auto &v : m.x.col(l))
                v = -v;
        }
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m.lambda[a] > m.lambda[b]; });
    CpModel sorted;
    sorted.diagnostics = std::move(m.diagnostics);
    sorted.lambda.resize(r);
    sorted.x = RealMatrix(d.d1, r);
    sorted.y = RealMatrix(d.d2, r);
    sorted.z = RealMatrix(d.d3, r);
    for (std::size_t l = 0; l < r; ++l)
    {
        const std::size_t src = order[l];
        sorted.lambda[l] = m.lambda[src];
        std::copy_n(m.x.col(src).begin(), d.d1, sorted.x.col(l).begin());
        std::copy_n(m.y.col(src).begin(), d.d2, sorted.y.col(l).begin());
        std::copy_n(m.z.col(src).begin(), d.d3, sorted.z.col(l).begin());
    }
    return sorted;
}

RealTensor3 reconstruct(const CpModel &m) { return reconstruct_impl(m.lambda, m.x, m.y, m.z); }

double fit_error(const CpModel &m, const RealTensor3 &t)
{
    if (m.dims() != t.dims())
        throw ContractError("fit_error: model dims " + to_string(m.dims()) + " vs tensor dims " +
                            to_string(t.dims()));
    const double residual = frobenius_norm(subtract(t, reconstruct(m)));
    const double norm_t = frobenius_norm(t);
    return norm_t > 0.0 ? residual / norm_t : residual;
}

std::vector<double> sorted_weights(const CpModel &m)
{
    for (std::size_t l = 1; l < m.lambda.size(); ++l)
        if (m.lambda[l] > m.lambda[l - 1])
            throw InvariantError("sorted_weights: CP weights are not in descending order");
    return m.lambda;
}

} // namespace mmsense
