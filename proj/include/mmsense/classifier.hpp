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


#ifndef MMSENSE_CLASSIFIER_HPP
#define MMSENSE_CLASSIFIER_HPP

// Fully connected classifier u -> 64 -> 32 -> 32 -> 32 -> v with ELU hidden
// layers and a softmax output, trained on categorical cross-entropy with
// Adam.

#include "mmsense/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mmsense
{

inline const std::vector<std::size_t> kDefaultHidden{64, 32, 32, 32};

struct MlpModel
{
    std::vector<std::size_t> layer_dims; // u, hidden..., v
    // weights[k](i, o) connects input i of layer k to output o, so each
    // output's fan-in is one contiguous column.
    std::vector<RealMatrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t num_layers() const { return weights.size(); }
    std::size_t parameter_count() const;
};

// Glorot-uniform weights from `seed`, zero biases.
MlpModel make_mlp(std::size_t u, std::size_t v, std::uint64_t seed,
                  const std::vector<std::size_t> &hidden = kDefaultHidden);

double elu(double z);

std::vector<double> forward(const MlpModel &m, std::span<const double> x);

// -log(max(p[label], 1e-12)).
double loss(const MlpModel &m, std::span<const double> x, std::size_t label);

// Inputs are stored row-major, one sample per row; labels are class indices
// (the one-hot row of sample i has its 1 at labels[i]).
struct LabeledDataset
{
    std::size_t dim = 0;
    std::size_t num_classes = 0;
    std::vector<double> inputs;
    std::vector<std::size_t> labels;
    std::vector<std::string> ids;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {inputs.data() + i * dim, dim}; }
    std::vector<double> one_hot(std::size_t i) const;
    void push_back(std::span<const double> x, std::size_t label, std::string id = {});
    LabeledDataset subset(std::span<const std::size_t> indices) const;
    void validate() const;
};

// Same layout as the model's parameters.
struct Gradient
{
    std::vector<RealMatrix> weights;
    std::vector<std::vector<double>> biases;
};

Gradient zero_gradient(const MlpModel &m);

// Mean gradient of the loss over ds rows `batch`.
Gradient grad(const MlpModel &m, const LabeledDataset &ds, std::span<const std::size_t> batch);

struct TrainConfig
{
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double split_fraction = 0.85;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdamState
{
    Gradient m;
    Gradient v;
    std::uint64_t t = 0;
};

AdamState make_adam_state(const MlpModel &m);

void adam_step(MlpModel &m, const Gradient &g, AdamState &state, const TrainConfig &cfg);

struct Split
{
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> test_index;
};

// Seeded shuffle; the first ceil(fraction * N) samples train. Reshuffles (up
// to 100 times) until every class occurs in the training part, otherwise
// throws DataError.
Split split(const LabeledDataset &ds, double fraction, std::uint64_t seed);

struct TrainResult
{
    MlpModel model;
    std::vector<double> loss_history; // mean training loss per epoch
};

// Minibatch Adam for cfg.epochs; throws NumericError on a non-finite loss.
TrainResult train(const LabeledDataset &ds, const TrainConfig &cfg,
                  const std::vector<std::size_t> &hidden = kDefaultHidden);

// Argmax with ties to the lowest index.
std::size_t predict(const MlpModel &m, std::span<const double> x);

struct ConfusionMatrix
{
    std::size_t classes = 0;
    std::vector<std::size_t> counts; // row = true, column = predicted

    std::size_t &at(std::size_t truth, std::size_t pred) { return counts[truth * classes + pred]; }
    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes + pred]; }
    std::size_t total() const;
    double accuracy() const;
    double precision(std::size_t c) const; // NaN when the class is never predicted
    double recall(std::size_t c) const;    // NaN when the class is absent
};

ConfusionMatrix evaluate(const MlpModel &m, const LabeledDataset &test);

// One window of an early/late control: its features and where it sits in
// its record.
struct ControlWindow
{
    std::vector<double> x;
    std::size_t start = 0;
    std::size_t length = 0;
    std::size_t record_snapshots = 0;
};

struct ControlResult
{
    double accuracy = 0.0;
    std::size_t windows_used = 0;
    std::size_t windows_dropped = 0; // straddling the midpoint
    ConfusionMatrix confusion;
};

// Windows ending by the record midpoint are "early" (class 0), those
// starting at or after it are "late" (class 1). A two-output network of
// the same shape is trained on an 80/20 split. Throws DataError with fewer
// than 5 usable windows.
ControlResult early_late_control(const std::vector<ControlWindow> &windows, const TrainConfig &cfg,
                                 const std::vector<std::size_t> &hidden = kDefaultHidden);

// Checkpoint: one line of JSON (layer sizes, activations, seed, training
// config, parameter count) followed by the parameters as little-endian
// float64, layer by layer, weights column by column then biases.
void save_model(std::ostream &os, const MlpModel &m, const TrainConfig &cfg);
MlpModel load_model(std::istream &is);

} // namespace mmsense

#endif
