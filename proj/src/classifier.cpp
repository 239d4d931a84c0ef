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


#include "mmsense/classifier.hpp"

#include "mmsense/error.hpp"
#include "mmsense/random.hpp"
#include "mmsense/simd/kernels.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace mmsense
{

namespace
{

constexpr double kProbFloor = 1e-12;

enum Stream : std::uint64_t
{
    kStreamInit = 0x1417,
    kStreamShuffle = 0x7EA1,
    kStreamSplit = 0x5B11,
};

struct Trace
{
    std::vector<std::vector<double>> z; // pre-activations per layer
    std::vector<std::vector<double>> a; // a[0] = x, a[k+1] = act(z[k])
};

void softmax_inplace(std::vector<double> &z)
{
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double &v : z)
        s += (v = std::exp(v - mx));
    for (double &v : z)
        v /= s;
}

void run(const MlpModel &m, std::span<const double> x, Trace &tr)
{
    if (x.size() != m.input_dim())
        throw ContractError("forward: input length " + std::to_string(x.size()) + ", model expects " +
                            std::to_string(m.input_dim()));
    const auto &k = simd::active();
    const std::size_t L = m.num_layers();
    tr.z.resize(L);
    tr.a.resize(L + 1);
    tr.a[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < L; ++l)
    {
        const RealMatrix &w = m.weights[l];
        auto &z = tr.z[l];
        z.resize(w.cols());
        k.gemv_t(w.data().data(), w.rows(), w.rows(), w.cols(), tr.a[l].data(), z.data());
        for (std::size_t o = 0; o < z.size(); ++o)
            z[o] += m.biases[l][o];
        auto &a = tr.a[l + 1];
        a = z;
        if (l + 1 < L)
            for (double &v : a)
                v = elu(v);
        else
            softmax_inplace(a);
    }
}

void check_label(const MlpModel &m, std::size_t label)
{
    if (label >= m.output_dim())
        throw ContractError("label " + std::to_string(label) + " outside [0, " + std::to_string(m.output_dim()) +
                            ")");
}

template <class F> void for_each_param(MlpModel &m, F &&f)
{
    for (std::size_t l = 0; l < m.num_layers(); ++l)
    {
        for (double &w : m.weights[l].data())
            f(w);
        for (double &b : m.biases[l])
            f(b);
    }
}

void put_f64(std::ostream &os, double v)
{
    const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int b = 0; b < 8; ++b)
        buf[b] = static_cast<char>((u >> (8 * b)) & 0xFFu);
    os.write(buf, 8);
}

double get_f64(std::istream &is)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8))
        throw DataError("model checkpoint: truncated parameter blob");
    std::uint64_t u = 0;
    for (int b = 7; b >= 0; --b)
        u = (u << 8) | buf[b];
    return std::bit_cast<double>(u);
}

} // namespace

std::size_t MlpModel::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < num_layers(); ++l)
        n += weights[l].size() + biases[l].size();
    return n;
}

MlpModel make_mlp(std::size_t u, std::size_t v, std::uint64_t seed, const std::vector<std::size_t> &hidden)
{
    if (u == 0 || v < 2)
        throw ContractError("make_mlp: need u >= 1 inputs and v >= 2 classes");
    MlpModel m;
    m.layer_dims.push_back(u);
    m.layer_dims.insert(m.layer_dims.end(), hidden.begin(), hidden.end());
    m.layer_dims.push_back(v);
    Rng rng = make_rng(seed, kStreamInit);
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l)
    {
        const std::size_t in = m.layer_dims[l], out = m.layer_dims[l + 1];
        if (out == 0)
            throw ContractError("make_mlp: empty hidden layer");
        const double limit = std::sqrt(6.0 / double(in + out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        RealMatrix w(in, out);
        for (double &x : w.data())
            x = dist(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out, 0.0);
    }
    return m;
}

double elu(double z) { return z > 0.0 ? z : std::expm1(z); }

std::vector<double> forward(const MlpModel &m, std::span<const double> x)
{
    Trace tr;
    run(m, x, tr);
    return std::move(tr.a.back());
}

double loss(const MlpModel &m, std::span<const double> x, std::size_t label)
{
    check_label(m, label);
    const std::vector<double> p = forward(m, x);
    return -std::log(std::max(p[label], kProbFloor));
}

std::vector<double> LabeledDataset::one_hot(std::size_t i) const
{
    std::vector<double> c(num_classes, 0.0);
    c.at(labels.at(i)) = 1.0;
    return c;
}

void LabeledDataset::push_back(std::span<const double> x, std::size_t label, std::string id)
{
    if (dim == 0 && labels.empty())
        dim = x.size();
    if (x.size() != dim)
        throw ContractError("LabeledDataset: row length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(dim));
    if (label >= num_classes)
        throw ContractError("LabeledDataset: label outside the class range");
    inputs.insert(inputs.end(), x.begin(), x.end());
    labels.push_back(label);
    ids.push_back(std::move(id));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const
{
    LabeledDataset out;
    out.dim = dim;
    out.num_classes = num_classes;
    out.inputs.reserve(indices.size() * dim);
    for (std::size_t i : indices)
    {
        const auto r = row(i);
        out.inputs.insert(out.inputs.end(), r.begin(), r.end());
        out.labels.push_back(labels.at(i));
        out.ids.push_back(i < ids.size() ? ids[i] : std::string());
    }
    return out;
}

void LabeledDataset::validate() const
{
    if (inputs.size() != labels.size() * dim)
        throw ContractError("LabeledDataset: inputs do not match N x dim");
    for (std::size_t c : labels)
        if (c >= num_classes)
            throw ContractError("LabeledDataset: label outside the class range");
}

Gradient zero_gradient(const MlpModel &m)
{
    Gradient g;
    for (std::size_t l = 0; l < m.num_layers(); ++l)
    {
        g.weights.emplace_back(m.weights[l].rows(), m.weights[l].cols());
        g.biases.emplace_back(m.biases[l].size(), 0.0);
    }
    return g;
}

Gradient grad(const MlpModel &m, const LabeledDataset &ds, std::span<const std::size_t> batch)
{
    if (batch.empty())
        throw ContractError("grad: empty batch");
    const auto &k = simd::active();
    Gradient g = zero_gradient(m);
    Trace tr;
    std::vector<double> delta, prev;
    const std::size_t L = m.num_layers();
    for (std::size_t i : batch)
    {
        check_label(m, ds.labels.at(i));
        run(m, ds.row(i), tr);
        // Softmax with cross-entropy: dL/dz = p - onehot.
        delta = tr.a[L];
        delta[ds.labels[i]] -= 1.0;
        for (std::size_t l = L; l-- > 0;)
        {
            RealMatrix &gw = g.weights[l];
            const std::size_t in = gw.rows();
            for (std::size_t o = 0; o < delta.size(); ++o)
            {
                k.axpy(delta[o], tr.a[l].data(), gw.data().data() + o * in, in);
                g.biases[l][o] += delta[o];
            }
            if (l == 0)
                break;
            prev.assign(in, 0.0);
            k.gemv_n(m.weights[l].data().data(), in, in, delta.size(), delta.data(), prev.data());
            const auto &z = tr.z[l - 1];
            for (std::size_t n = 0; n < in; ++n)
                prev[n] *= z[n] > 0.0 ? 1.0 : std::exp(z[n]);
            delta.swap(prev);
        }
    }
    const double inv = 1.0 / double(batch.size());
    for (std::size_t l = 0; l < L; ++l)
    {
        for (double &v : g.weights[l].data())
            v *= inv;
        for (double &v : g.biases[l])
            v *= inv;
    }
    return g;
}

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("train: learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ValidationError("train: Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0))
        throw ValidationError("train: epsilon must be positive");
    if (batch_size == 0)
        throw ValidationError("train: batch_size must be positive");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw ValidationError("train: split_fraction must lie in (0, 1)");
}

AdamState make_adam_state(const MlpModel &m) { return {zero_gradient(m), zero_gradient(m), 0}; }

void adam_step(MlpModel &m, const Gradient &g, AdamState &state, const TrainConfig &cfg)
{
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, double(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(state.t));
    auto update = [&](std::span<double> p, std::span<const double> gr, std::span<double> mm, std::span<double> vv) {
        for (std::size_t n = 0; n < p.size(); ++n)
        {
            mm[n] = cfg.beta1 * mm[n] + (1.0 - cfg.beta1) * gr[n];
            vv[n] = cfg.beta2 * vv[n] + (1.0 - cfg.beta2) * gr[n] * gr[n];
            p[n] -= cfg.learning_rate * (mm[n] / c1) / (std::sqrt(vv[n] / c2) + cfg.epsilon);
        }
    };
    for (std::size_t l = 0; l < m.num_layers(); ++l)
    {
        update(m.weights[l].data(), g.weights[l].data(), state.m.weights[l].data(), state.v.weights[l].data());
        update(m.biases[l], g.biases[l], state.m.biases[l], state.v.biases[l]);
    }
}

Split split(const LabeledDataset &ds, double fraction, std::uint64_t seed)
{
    ds.validate();
    const std::size_t n = ds.size();
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValidationError("split: fraction must lie in (0, 1)");
    if (n < ds.num_classes)
        throw DataError("split: " + std::to_string(n) + " samples cannot cover " + std::to_string(ds.num_classes) +
                        " classes");
    // The small offset keeps products such as 0.85 * 20 from rounding up.
    const std::size_t n_train = std::min<std::size_t>(n, std::size_t(std::ceil(fraction * double(n) - 1e-9)));

    Rng rng = make_rng(seed, kStreamSplit);
    std::vector<std::size_t> order(n);
    for (int attempt = 0; attempt < 100; ++attempt)
    {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<bool> seen(ds.num_classes, false);
        for (std::size_t i = 0; i < n_train; ++i)
            seen[ds.labels[order[i]]] = true;
        if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        {
            Split s;
            s.train_index.assign(order.begin(), order.begin() + std::ptrdiff_t(n_train));
            s.test_index.assign(order.begin() + std::ptrdiff_t(n_train), order.end());
            s.train = ds.subset(s.train_index);
            s.test = ds.subset(s.test_index);
            return s;
        }
    }
    throw DataError("split: some class is missing from the training part after 100 shuffles");
}

TrainResult train(const LabeledDataset &ds, const TrainConfig &cfg, const std::vector<std::size_t> &hidden)
{
    cfg.validate();
    ds.validate();
    if (ds.size() == 0)
        throw DataError("train: empty dataset");
    TrainResult res{make_mlp(ds.dim, ds.num_classes, cfg.seed, hidden), {}};
    AdamState state = make_adam_state(res.model);
    Rng rng = make_rng(cfg.seed, kStreamShuffle);
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size)
        {
            const std::span<const std::size_t> batch(order.data() + b, std::min(cfg.batch_size, order.size() - b));
            for (std::size_t i : batch)
                total += loss(res.model, ds.row(i), ds.labels[i]);
            adam_step(res.model, grad(res.model, ds, batch), state, cfg);
        }
        const double mean = total / double(ds.size());
        if (!std::isfinite(mean))
            throw NumericError("train: loss became non-finite in epoch " + std::to_string(epoch + 1) +
                               " (learning rate too large or non-finite inputs)");
        res.loss_history.push_back(mean);
    }
    return res;
}

std::size_t predict(const MlpModel &m, std::span<const double> x)
{
    const std::vector<double> p = forward(m, x);
    // max_element returns the first maximum, which is the tie rule.
    return std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

double ConfusionMatrix::accuracy() const
{
    std::size_t diag = 0;
    for (std::size_t c = 0; c < classes; ++c)
        diag += at(c, c);
    const std::size_t n = total();
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : double(diag) / double(n);
}

double ConfusionMatrix::precision(std::size_t c) const
{
    std::size_t col = 0;
    for (std::size_t t = 0; t < classes; ++t)
        col += at(t, c);
    return col == 0 ? std::numeric_limits<double>::quiet_NaN() : double(at(c, c)) / double(col);
}

double ConfusionMatrix::recall(std::size_t c) const
{
    std::size_t row = 0;
    for (std::size_t p = 0; p < classes; ++p)
        row += at(c, p);
    return row == 0 ? std::numeric_limits<double>::quiet_NaN() : double(at(c, c)) / double(row);
}

ConfusionMatrix evaluate(const MlpModel &m, const LabeledDataset &test)
{
    if (test.size() == 0)
        throw ContractError("evaluate: empty test set");
    ConfusionMatrix cm{m.output_dim(), std::vector<std::size_t>(m.output_dim() * m.output_dim(), 0)};
    for (std::size_t i = 0; i < test.size(); ++i)
    {
        check_label(m, test.labels[i]);
        ++cm.at(test.labels[i], predict(m, test.row(i)));
    }
    return cm;
}

ControlResult early_late_control(const std::vector<ControlWindow> &windows, const TrainConfig &cfg,
                                 const std::vector<std::size_t> &hidden)
{
    LabeledDataset ds;
    ds.num_classes = 2;
    ControlResult res;
    for (const ControlWindow &w : windows)
    {
        const std::size_t mid2 = w.record_snapshots; // compare in half-snapshot units
        if (2 * (w.start + w.length) <= mid2)
            ds.push_back(w.x, 0);
        else if (2 * w.start >= mid2)
            ds.push_back(w.x, 1);
        else
            ++res.windows_dropped;
    }
    res.windows_used = ds.size();
    // 80/20 leaves a non-empty test part from 5 windows on.
    if (ds.size() < 5)
        throw DataError("early/late control: " + std::to_string(ds.size()) + " usable windows, need at least 5");

    TrainConfig c = cfg;
    c.split_fraction = 0.8;
    const Split s = split(ds, c.split_fraction, c.seed);
    const TrainResult tr = train(s.train, c, hidden);
    res.confusion = evaluate(tr.model, s.test);
    res.accuracy = res.confusion.accuracy();
    return res;
}

void save_model(std::ostream &os, const MlpModel &m, const TrainConfig &cfg)
{
    nlohmann::ordered_json h;
    h["format"] = "mmsense-mlp";
    h["version"] = 1;
    h["layer_dims"] = m.layer_dims;
    std::vector<std::string> act(m.num_layers(), "elu");
    act.back() = "softmax";
    h["activations"] = act;
    h["seed"] = cfg.seed;
    h["train"] = {{"learning_rate", cfg.learning_rate}, {"beta1", cfg.beta1},
                  {"beta2", cfg.beta2},                 {"epsilon", cfg.epsilon},
                  {"epochs", cfg.epochs},               {"batch_size", cfg.batch_size},
                  {"split_fraction", cfg.split_fraction}};
    h["parameters"] = m.parameter_count();
    os << h.dump() << '\n';
    for (std::size_t l = 0; l < m.num_layers(); ++l)
    {
        for (double w : m.weights[l].data())
            put_f64(os, w);
        for (double b : m.biases[l])
            put_f64(os, b);
    }
    if (!os)
        throw DataError("model checkpoint: write failed");
}

MlpModel load_model(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line))
        throw DataError("model checkpoint: missing header");
    nlohmann::json h;
    try
    {
        h = nlohmann::json::parse(line);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw DataError(std::string("model checkpoint: bad header: ") + e.what());
    }
    if (h.value("format", "") != "mmsense-mlp")
        throw DataError("model checkpoint: not an mmsense-mlp file");
    const auto dims = h.at("layer_dims").get<std::vector<std::size_t>>();
    if (dims.size() < 2)
        throw DataError("model checkpoint: need at least two layer sizes");
    const std::vector<std::size_t> hidden(dims.begin() + 1, dims.end() - 1);
    MlpModel m = make_mlp(dims.front(), dims.back(), 0, hidden);
    if (h.at("parameters").get<std::size_t>() != m.parameter_count())
        throw DataError("model checkpoint: parameter count does not match layer sizes");
    for_each_param(m, [&](double &p) { p = get_f64(is); });
    return m;
}

} // namespace mmsense
