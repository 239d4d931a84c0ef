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


#ifndef MMSENSE_PIPELINE_HPP
#define MMSENSE_PIPELINE_HPP

// Experiment orchestration shared by the command-line tool and the
// acceptance harness: manifest, dataset files, feature tables, training
// reports, antenna sweeps and the early/late control.

#include "mmsense/channel_sim.hpp"
#include "mmsense/classifier.hpp"
#include "mmsense/cp_als.hpp"
#include "mmsense/features.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mmsense
{

struct ExperimentManifest
{
    SimConfig sim;
    std::size_t t_w = 200;
    AlsConfig als{100, 100, 1e-6, 0}; // als.rank is r_max
    TrainConfig train;
    bool drop_largest = true;
    std::array<std::size_t, kNumActivities> experiments_per_activity{36, 18, 18, 18, 18};
    std::vector<std::size_t> antenna_sweep{3, 10, 25, 50, 75, 100};
    std::string output_dir = "mmsense-out";

    std::size_t r_max() const { return als.rank; }
    std::size_t total_records() const;
    // Sets the simulation, ALS and training seeds together.
    void set_seed(std::uint64_t seed);
    void validate() const;
};

// JSON (de)serialisation. Missing keys keep their defaults; unknown keys
// are a ValidationError.
ExperimentManifest manifest_from_json(const std::string &text);
std::string manifest_to_json(const ExperimentManifest &m);
ExperimentManifest load_manifest(const std::filesystem::path &path);

// 16 hex digits of FNV-1a over the normalised manifest JSON and an input
// label. Names default output directories so that identical requests map
// to the same place and different ones never collide.
std::string request_digest(const ExperimentManifest &m, const std::string &input);
// <m.output_dir>/<command>-<digest>
std::filesystem::path default_output_dir(const ExperimentManifest &m, const std::string &command,
                                         const std::string &input);

// Verbosity-gated diagnostics sink; null means silent.
using LogFn = std::function<void(const std::string &)>;

struct RunOptions
{
    std::size_t workers = 1;
    LogFn log;
};

struct RecordInfo
{
    std::size_t index = 0; // position in the dataset, drives the seed
    ActivityKind label = ActivityKind::A1Static;
    std::size_t experiment = 0;
    std::uint64_t seed = 0;
    std::string name; // file stem
};

// Records in dataset order: A1 experiments first, then A2, ..., A5.
std::vector<RecordInfo> plan_records(const ExperimentManifest &m);

SimulatedRecord simulate_one(const ExperimentManifest &m, const RecordInfo &r);

// <dir>/<name>.mmt3 plus a JSON sidecar <dir>/<name>.json.
void write_record(const std::filesystem::path &dir, const RecordInfo &info, const SimulatedRecord &rec);
SimulatedRecord read_record(const std::filesystem::path &dir, const std::string &name);

// Run-length encoding of a loss mask as alternating run lengths, starting
// with a run of present snapshots (possibly of length 0).
std::vector<std::size_t> rle_encode(const std::vector<bool> &mask);
std::vector<bool> rle_decode(const std::vector<std::size_t> &runs);

// Writes every record and <dir>/dataset.json.
std::vector<RecordInfo> simulate_dataset(const ExperimentManifest &m, const std::filesystem::path &dir,
                                         const RunOptions &opt);
std::vector<RecordInfo> read_dataset_index(const std::filesystem::path &dir);

struct FeatureRow
{
    std::size_t window_id = 0;
    std::string record;
    std::size_t record_index = 0;
    std::size_t window = 0;
    std::size_t start = 0;
    std::size_t length = 0;
    std::size_t record_snapshots = 0;
    ActivityKind label = ActivityKind::A1Static;
    bool degenerate = false;
    std::vector<std::vector<double>> lambdas; // 31 x r_max
};

struct FeatureTable
{
    std::size_t r_max = 0;
    std::size_t antennas = 0;
    std::vector<FeatureRow> rows;
    std::vector<std::string> skipped_records;
    std::size_t invalid_windows = 0;
    std::size_t degenerate_windows = 0;

    std::array<std::size_t, kNumActivities> class_counts() const;
};

// Seed of the CP runs for window w of record r.
std::uint64_t window_seed(std::uint64_t als_seed, std::size_t record_index, std::size_t window);

// interpolate -> (first `antennas` elements, 0 = all) -> segment ->
// extract_features for every window of one record.
std::vector<FeatureRow> featurize_record(const ExperimentManifest &m, const RecordInfo &info,
                                         const SimulatedRecord &rec, std::size_t antennas, const RunOptions &opt,
                                         std::size_t *invalid_windows = nullptr);

// Featurizes every record of a dataset directory. Unreadable records are
// skipped and logged; more than 10% skipped is a DataError.
FeatureTable featurize_dataset(const ExperimentManifest &m, const std::filesystem::path &dataset_dir,
                               std::size_t antennas, const RunOptions &opt);

// Same, simulating records in memory instead of reading them.
FeatureTable featurize_simulated(const ExperimentManifest &m, std::size_t antennas, const RunOptions &opt);

// features.csv, features.bin, features.schema.json, features.summary.json
// and windows.csv.
void write_features(const std::filesystem::path &dir, const FeatureTable &t, bool drop_largest);
FeatureTable read_features(const std::filesystem::path &dir);

LabeledDataset to_dataset(const FeatureTable &t, bool drop_largest);

struct EvalReport
{
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    std::vector<double> loss_history;
    MlpModel model;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

// 85/15 split (manifest train.split_fraction), train, evaluate.
EvalReport train_eval(const FeatureTable &t, const ExperimentManifest &m);
// metrics.json, confusion.csv, loss.csv, model.ckpt.
void write_eval(const std::filesystem::path &dir, const EvalReport &r, const ExperimentManifest &m);

struct SweepRow
{
    std::size_t antennas = 0;
    std::size_t windows = 0;
    double accuracy = 0.0;
};

// One featurize + train_eval per sweep value; `features_for(M)` supplies
// the table for M antennas.
std::vector<SweepRow> sweep_antennas(const ExperimentManifest &m,
                                     const std::function<FeatureTable(std::size_t)> &features_for);
void write_sweep(const std::filesystem::path &dir, const std::vector<SweepRow> &rows);

struct ControlRow
{
    ActivityKind activity = ActivityKind::A1Static;
    ControlResult result;
    bool pass = false; // accuracy within [0.35, 0.65]
};

std::vector<ControlRow> control(const FeatureTable &t, const ExperimentManifest &m);
void write_control(const std::filesystem::path &dir, const std::vector<ControlRow> &rows);

// Shortest round-trip decimal form, used for every number written to CSV.
std::string format_double(double v);

} // namespace mmsense

#endif
