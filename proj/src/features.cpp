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


#include "mmsense/features.hpp"

#include "mmsense/error.hpp"
#include "mmsense/random.hpp"
#include "mmsense/simd/kernels.hpp"

#include <cmath>
#include <numbers>

namespace mmsense
{

namespace
{

constexpr double kPi = std::numbers::pi;

// out (n x n, zeroed) = G G^H for a column-major n x c matrix with leading
// dimension ld. The lower triangle is accumulated column by column and
// mirrored, so the result is Hermitian exactly.
void outer_gram(const cdouble *g, std::size_t n, std::size_t c, std::size_t ld, cdouble *out)
{
    const auto &k = simd::active();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t col = 0; col < c; ++col)
        {
            const cdouble *x = g + j + col * ld;
            const cdouble a = std::conj(*x);
            if (a != cdouble(0.0, 0.0))
                k.caxpy(a, x, out + j + j * n, n - j);
        }
    for (std::size_t j = 0; j < n; ++j)
    {
        out[j + j * n].imag(0.0);
        for (std::size_t i = j + 1; i < n; ++i)
            out[j + i * n] = std::conj(out[i + j * n]);
    }
}

// out (c x c) = G^H G.
void inner_gram(const cdouble *g, std::size_t n, std::size_t c, std::size_t ld, cdouble *out)
{
    const auto &k = simd::active();
    for (std::size_t j = 0; j < c; ++j)
    {
        out[j + j * c] = cdouble(k.cdotc(g + j * ld, g + j * ld, n).real(), 0.0);
        for (std::size_t i = j + 1; i < c; ++i)
        {
            const cdouble v = k.cdotc(g + i * ld, g + j * ld, n);
            out[i + j * c] = v;
            out[j + i * c] = std::conj(v);
        }
    }
}

// Correction that folds an angle step d into (-pi, pi], zero for |d| < pi.
double wrap_correction(double d)
{
    if (std::abs(d) < kPi)
        return 0.0;
    double dd = std::fmod(d + kPi, 2.0 * kPi);
    if (dd < 0.0)
        dd += 2.0 * kPi;
    dd -= kPi;
    if (dd == -kPi && d > 0.0)
        dd = kPi;
    return dd - d;
}

// Divides a slice by its Frobenius norm; leaves a zero slice at zero.
template <class T> void normalize_slice(std::span<T> s)
{
    double ss = 0.0;
    for (const T &v : s)
        ss += std::norm(v);
    if (ss == 0.0)
        return;
    const double inv = 1.0 / std::sqrt(ss);
    for (T &v : s)
        v *= inv;
}

} // namespace

CorrelationPair corr_per_antenna(const ComplexTensor3 &g)
{
    const Dims3 d = g.dims();
    CorrelationPair out{ComplexTensor3({d.d1, d.d1, d.d3}), ComplexTensor3({d.d2, d.d2, d.d3})};
    for (std::size_t m = 0; m < d.d3; ++m)
    {
        const cdouble *gm = &g(0, 0, m);
        outer_gram(gm, d.d1, d.d2, d.d1, out.outer.slice(m).data());
        inner_gram(gm, d.d1, d.d2, d.d1, out.inner.slice(m).data());
    }
    return out;
}

CorrelationPair corr_per_subcarrier(const ComplexTensor3 &g)
{
    const Dims3 d = g.dims();
    CorrelationPair out{ComplexTensor3({d.d1, d.d1, d.d2}), ComplexTensor3({d.d3, d.d3, d.d2})};
    const std::size_t ld = d.d1 * d.d2;
    for (std::size_t f = 0; f < d.d2; ++f)
    {
        const cdouble *gf = &g(0, f, 0);
        outer_gram(gf, d.d1, d.d3, ld, out.outer.slice(f).data());
        inner_gram(gf, d.d1, d.d3, ld, out.inner.slice(f).data());
    }
    return out;
}

CorrelationPair corr_per_time(const ComplexTensor3 &g)
{
    const Dims3 d = g.dims();
    // Snapshot slices are strided in g; gather them as contiguous F x M blocks.
    std::vector<cdouble> gt(g.size());
    for (std::size_t m = 0; m < d.d3; ++m)
        for (std::size_t f = 0; f < d.d2; ++f)
            for (std::size_t t = 0; t < d.d1; ++t)
                gt[f + m * d.d2 + t * d.d2 * d.d3] = g(t, f, m);

    CorrelationPair out{ComplexTensor3({d.d2, d.d2, d.d1}), ComplexTensor3({d.d3, d.d3, d.d1})};
    for (std::size_t t = 0; t < d.d1; ++t)
    {
        const cdouble *gs = gt.data() + t * d.d2 * d.d3;
        outer_gram(gs, d.d2, d.d3, d.d2, out.outer.slice(t).data());
        inner_gram(gs, d.d2, d.d3, d.d2, out.inner.slice(t).data());
    }
    return out;
}

CorrelationSet correlations(const ComplexTensor3 &g)
{
    auto a = corr_per_antenna(g);
    auto f = corr_per_subcarrier(g);
    auto t = corr_per_time(g);
    return {std::move(a.outer), std::move(a.inner), std::move(f.outer),
            std::move(f.inner), std::move(t.outer), std::move(t.inner)};
}

void unwrap_phase_slice(std::span<double> slice, std::size_t rows, std::size_t cols)
{
    if (slice.size() != rows * cols)
        throw ContractError("unwrap_phase_slice: slice size does not match rows x cols");
    if (rows == 0 || cols == 0)
        return;
    auto at = [&](std::size_t i, std::size_t j) -> double & { return slice[i + j * rows]; };

    // The column pass compares the original first-column angles.
    std::vector<double> first(rows);
    for (std::size_t i = 0; i < rows; ++i)
        first[i] = at(i, 0);

    for (std::size_t i = 0; i < rows; ++i)
    {
        double cum = 0.0;
        double prev = at(i, 0);
        for (std::size_t j = 1; j < cols; ++j)
        {
            const double raw = at(i, j);
            cum += wrap_correction(raw - prev);
            prev = raw;
            at(i, j) = raw + cum;
        }
    }
    double cum = 0.0;
    for (std::size_t i = 1; i < rows; ++i)
    {
        cum += wrap_correction(first[i] - first[i - 1]);
        if (cum != 0.0)
            for (std::size_t j = 0; j < cols; ++j)
                at(i, j) += cum;
    }
}

AmpPhase amp_phase_tensors(const ComplexTensor3 &c)
{
    const Dims3 d = c.dims();
    AmpPhase out{RealTensor3(d), RealTensor3(d)};
    for (std::size_t s = 0; s < d.d3; ++s)
    {
        const auto src = c.slice(s);
        auto a = out.amplitude.slice(s);
        auto p = out.phase.slice(s);
        double ss = 0.0;
        for (std::size_t n = 0; n < src.size(); ++n)
        {
            a[n] = std::abs(src[n]);
            ss += a[n] * a[n];
        }
        if (ss == 0.0)
        {
            std::fill(a.begin(), a.end(), 0.0);
            continue;
        }
        normalize_slice(a);
        for (std::size_t n = 0; n < src.size(); ++n)
            p[n] = std::arg(src[n]);
        unwrap_phase_slice(p, d.d1, d.d2);
        normalize_slice(p);
    }
    return out;
}

NormalizedParts normalized_complex(const ComplexTensor3 &c)
{
    const Dims3 d = c.dims();
    NormalizedParts out{RealTensor3(d), RealTensor3(d), RealTensor3(d)};
    std::vector<cdouble> tmp(d.d1 * d.d2);
    for (std::size_t s = 0; s < d.d3; ++s)
    {
        const auto src = c.slice(s);
        std::copy(src.begin(), src.end(), tmp.begin());
        normalize_slice(std::span<cdouble>(tmp));
        auto re = out.re.slice(s);
        auto im = out.im.slice(s);
        auto amp = out.amp.slice(s);
        for (std::size_t n = 0; n < tmp.size(); ++n)
        {
            re[n] = tmp[n].real();
            im[n] = tmp[n].imag();
            amp[n] = std::abs(tmp[n]);
        }
    }
    return out;
}

const std::array<std::string, kNumFeatureTensors> &feature_tensor_names()
{
    static const std::array<std::string, kNumFeatureTensors> names = [] {
        std::array<std::string, kNumFeatureTensors> n;
        const char *corr[] = {"C_F_M", "C_Tw_M", "C_M_F", "C_Tw_F", "C_M_Tw", "C_F_Tw"};
        const char *part[] = {"A", "P", "Re", "Im", "NA"};
        n[0] = "abs_G";
        std::size_t i = 1;
        for (const char *c : corr)
            for (const char *p : part)
                n[i++] = std::string(c) + "." + p;
        return n;
    }();
    return names;
}

std::vector<RealTensor3> feature_tensors(const ComplexTensor3 &g)
{
    std::vector<RealTensor3> out;
    out.reserve(kNumFeatureTensors);
    out.push_back(abs(g));
    CorrelationSet cs = correlations(g);
    for (ComplexTensor3 *c : {&cs.c_F_M, &cs.c_Tw_M, &cs.c_M_F, &cs.c_Tw_F, &cs.c_M_Tw, &cs.c_F_Tw})
    {
        AmpPhase ap = amp_phase_tensors(*c);
        NormalizedParts np = normalized_complex(*c);
        out.push_back(std::move(ap.amplitude));
        out.push_back(std::move(ap.phase));
        out.push_back(std::move(np.re));
        out.push_back(std::move(np.im));
        out.push_back(std::move(np.amp));
        *c = ComplexTensor3({1, 1, 1}); // release early; the set is large
    }
    return out;
}

FeatureSet extract_features(const ComplexTensor3 &g, const AlsConfig &als)
{
    als.validate();
    const std::size_t r_max = als.rank;
    FeatureSet fs;
    fs.lambdas.assign(kNumFeatureTensors, std::vector<double>(r_max, 0.0));
    if (frobenius_norm(g) == 0.0)
    {
        fs.degenerate = true;
        fs.diagnostic = "all-zero window";
        return fs;
    }

    const std::vector<RealTensor3> tensors = feature_tensors(g);
    for (std::size_t i = 0; i < kNumFeatureTensors; ++i)
    {
        AlsConfig cfg = als;
        cfg.rank = std::min(r_max, rank_upper_bound(tensors[i].dims()));
        cfg.seed = derive_seed(als.seed, i);
        const CpModel model = cp_als(tensors[i], cfg);
        const std::vector<double> w = sorted_weights(model);
        bool finite = !model.diagnostics.diverged;
        for (double v : w)
            finite = finite && std::isfinite(v);
        if (!finite)
        {
            fs.invalid = true;
            if (!fs.diagnostic.empty())
                fs.diagnostic += "; ";
            fs.diagnostic += "ALS diverged on " + feature_tensor_names()[i];
            continue;
        }
        std::copy(w.begin(), w.end(), fs.lambdas[i].begin());
    }
    return fs;
}

std::size_t input_dimension(std::size_t r_max, bool drop_largest)
{
    return kNumFeatureTensors * (drop_largest ? (r_max == 0 ? 0 : r_max - 1) : r_max);
}

std::vector<double> assemble_input(const FeatureSet &fs, bool drop_largest)
{
    const std::size_t r = fs.r_max();
    std::vector<double> x;
    x.reserve(input_dimension(r, drop_largest));
    for (const auto &l : fs.lambdas)
    {
        if (l.size() != r)
            throw ContractError("assemble_input: inconsistent weight vector lengths");
        x.insert(x.end(), l.begin() + (drop_largest && r > 0 ? 1 : 0), l.end());
    }
    return x;
}

} // namespace mmsense
