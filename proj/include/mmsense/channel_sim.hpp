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

#ifndef MMSENSE_CHANNEL_SIM_HPP
#define MMSENSE_CHANNEL_SIM_HPP

// Synthetic uplink massive-MIMO channel records, T x F x M (time, subcarrier,
// antenna), for five activity classes:
//
//   Y(t,f,m) = H(t,f,m) * d_m * exp(j(phi_m - t*eta_{m,f})) + N(t,f,m)
//
// H is a sum of specular paths. Each path has a complex gain, a direction
// (planar-array steering phase), a delay (per-subcarrier phase ramp) and a
// per-snapshot modulation that carries the activity signature. The static
// part (diffuse paths plus an optional LOS path) is drawn per record, as if
// the UE were placed at a new spot for every experiment.

#include "mmsense/tensor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmsense
{

enum class Scenario
{
    Los,
    Nlos,
};

enum class ActivityKind
{
    A1Static = 0,
    A2Periodic = 1,
    A3Random = 2,
    A4RotateShift = 3,
    A5Rotate = 4,
};

inline constexpr std::size_t kNumActivities = 5;
inline constexpr std::array<ActivityKind, kNumActivities> kAllActivities{
    ActivityKind::A1Static, ActivityKind::A2Periodic, ActivityKind::A3Random, ActivityKind::A4RotateShift,
    ActivityKind::A5Rotate};

std::size_t class_index(ActivityKind kind);
ActivityKind activity_from_index(std::size_t index);
std::string_view to_string(ActivityKind kind); // "A1" .. "A5"
ActivityKind parse_activity(std::string_view name);
std::string_view to_string(Scenario s); // "LOS" / "NLOS"
Scenario parse_scenario(std::string_view name);

struct SimConfig
{
    std::size_t snapshots = 3000;  // T
    std::size_t subcarriers = 100; // F
    std::size_t antennas = 100;    // M
    double snapshot_interval = 0.01;
    double carrier_hz = 3.7e9;
    double bandwidth_hz = 20e6;
    Scenario scenario = Scenario::Los;
    // SNR of the unobstructed link. An NLOS record arrives nlos_blockage_db
    // weaker over the same noise floor.
    double snr_db = 20.0;
    double nlos_blockage_db = 15.0;
    double frame_loss_prob = 0.0;
    std::uint64_t seed = 0;

    std::size_t diffuse_paths = 8;
    double rician_k_db = 10.0; // LOS only
    // Power of one activity-scattered path relative to the static channel.
    double activity_power_db = -6.0;
    // Large-scale loss applied to every path. CSI units are arbitrary; this
    // fixes the absolute level that the un-normalized |G| weights carry.
    double path_gain_db = -40.0;

    double effective_snr_db() const { return scenario == Scenario::Nlos ? snr_db - nlos_blockage_db : snr_db; }
    void validate() const;
};

// Per-chain impairments: amplitude d_m, initial phase phi_m and CFO
// eta_{m,f} in radians per snapshot (stored M x F).
struct RfChainModel
{
    std::vector<double> amplitude;
    std::vector<double> phase;
    RealMatrix cfo;

    std::size_t antennas() const { return amplitude.size(); }
    std::size_t subcarriers() const { return cfo.cols(); }

    static RfChainModel identity(std::size_t antennas, std::size_t subcarriers);
    // d ~ U[0.8, 1.2], phi ~ U[0, 2pi), eta ~ U[-0.01, 0.01].
    static RfChainModel draw(std::size_t antennas, std::size_t subcarriers, std::uint64_t seed);
};

// Time-domain behaviour of a propagation path.
enum class PathMotion
{
    Static,
    Periodic,   // gain * (1 + depth * sin(2 pi t/period + offset))
    RandomWalk, // phase random walk
    Rotating,   // constant Doppler
};

struct PathParams
{
    cdouble gain;
    double azimuth = 0.0;   // rad
    double elevation = 0.0; // rad
    double delay_s = 0.0;
    double delay_rate = 0.0; // s per s
    PathMotion motion = PathMotion::Static;
    double doppler_hz = 0.0;
    double period_s = 0.0;
    double depth = 0.0;
    double offset = 0.0;
    double walk_sigma = 0.0; // rad per snapshot
    std::uint64_t walk_seed = 0;
};

struct ChannelParams
{
    std::vector<PathParams> paths;
    ActivityKind kind = ActivityKind::A1Static;
};

// Array element positions in half-wavelength units, numbered row-wise from
// the upper-left corner: a 4 x (M/4) grid when 4 divides M, else a line.
struct ArrayPosition
{
    double row;
    double col;
};
std::vector<ArrayPosition> array_layout(std::size_t antennas);

// Draws all channel parameters for one record from cfg.seed.
ChannelParams draw_channel_params(const SimConfig &cfg, ActivityKind kind);

// Evaluates the path model; no impairments and no noise.
ComplexTensor3 synthesize_channel(const SimConfig &cfg, const ChannelParams &params);

ComplexTensor3 generate_channel(const SimConfig &cfg, ActivityKind kind);

ComplexTensor3 apply_rf_chain(const ComplexTensor3 &h, const RfChainModel &rf);

// Adds circular complex Gaussian noise at the requested SNR relative to the
// mean power of y. Throws DataError if y has zero power.
ComplexTensor3 add_noise(const ComplexTensor3 &y, double snr_db, std::uint64_t seed);

struct FrameLossResult
{
    ComplexTensor3 tensor;
    std::vector<bool> mask; // true = snapshot lost
};

// Drops interior snapshots (never the first or last) with probability p.
FrameLossResult inject_frame_loss(const ComplexTensor3 &y, double p, std::uint64_t seed);

struct SimulatedRecord
{
    ComplexTensor3 tensor;
    std::vector<bool> mask;
    ActivityKind label = ActivityKind::A1Static;
    SimConfig manifest;
};

// Full chain: channel, RF impairments, noise, frame loss.
SimulatedRecord simulate_record(const SimConfig &cfg, ActivityKind kind);

} // namespace mmsense

#endif
