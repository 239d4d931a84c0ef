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

#include "mmsense/channel_sim.hpp"

#include "mmsense/random.hpp"
#include "mmsense/simd/kernels.hpp"

#include <cmath>
#include <numbers>

namespace mmsense
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Random-stream ids under SimConfig::seed.
enum Stream : std::uint64_t
{
    kStreamChannel = 1,
    kStreamRf = 2,
    kStreamNoise = 3,
    kStreamLoss = 4,
};

// Number of independently moving scatterers for the random activity.
constexpr std::size_t kRandomActivityPaths = 4;

double uniform(Rng &rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double random_sign(Rng &rng) { return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0; }

cdouble random_phasor(Rng &rng, double power)
{
    return std::polar(std::sqrt(power), uniform(rng, 0.0, 2.0 * kPi));
}

std::vector<cdouble> modulation(const PathParams &p, std::size_t snapshots, double dt)
{
    std::vector<cdouble> s(snapshots, cdouble(1.0, 0.0));
    switch (p.motion)
    {
    case PathMotion::Static:
        break;
    case PathMotion::Periodic:
        for (std::size_t t = 0; t < snapshots; ++t)
            s[t] = 1.0 + p.depth * std::sin(2.0 * kPi * double(t) * dt / p.period_s + p.offset);
        break;
    case PathMotion::RandomWalk: {
        Rng rng(p.walk_seed);
        std::normal_distribution<double> step(0.0, p.walk_sigma);
        double phase = 0.0;
        for (std::size_t t = 0; t < snapshots; ++t)
        {
            if (t > 0)
                phase += step(rng);
            s[t] = std::polar(1.0, phase);
        }
        break;
    }
    case PathMotion::Rotating:
        for (std::size_t t = 0; t < snapshots; ++t)
            s[t] = std::polar(1.0, 2.0 * kPi * p.doppler_hz * double(t) * dt);
        break;
    }
    return s;
}

PathParams activity_path(Rng &rng, double power)
{
    // The event area sits at a fixed spot in the room, so its scatterers
    // arrive from a narrow cone that does not depend on the UE position.
    PathParams p;
    p.gain = random_phasor(rng, power);
    p.azimuth = uniform(rng, 5.0, 25.0) * kDeg;
    p.elevation = uniform(rng, -10.0, 0.0) * kDeg;
    p.delay_s = uniform(rng, 40e-9, 100e-9);
    return p;
}

} // namespace

std::size_t class_index(ActivityKind kind) { return static_cast<std::size_t>(kind); }

ActivityKind activity_from_index(std::size_t index)
{
    if (index >= kNumActivities)
        throw ContractError("activity index out of range: " + std::to_string(index));
    return static_cast<ActivityKind>(index);
}

std::string_view to_string(ActivityKind kind)
{
    static constexpr std::array<std::string_view, kNumActivities> names{"A1", "A2", "A3", "A4", "A5"};
    return names[class_index(kind)];
}

ActivityKind parse_activity(std::string_view name)
{
    for (ActivityKind k : kAllActivities)
        if (to_string(k) == name)
            return k;
    throw ValidationError("unknown activity '" + std::string(name) + "' (expected A1..A5)");
}

std::string_view to_string(Scenario s) { return s == Scenario::Los ? "LOS" : "NLOS"; }

Scenario parse_scenario(std::string_view name)
{
    if (name == "LOS")
        return Scenario::Los;
    if (name == "NLOS")
        return Scenario::Nlos;
    throw ValidationError("unknown scenario '" + std::string(name) + "' (expected LOS or NLOS)");
}

void SimConfig::validate() const
{
    if (snapshots < 1 || subcarriers < 1 || antennas < 1)
        throw ValidationError("SimConfig: T, F and M must all be >= 1");
    if (!(frame_loss_prob >= 0.0 && frame_loss_prob < 0.5))
        throw ValidationError("SimConfig: frame_loss_prob must lie in [0, 0.5)");
    if (!(snapshot_interval > 0.0) || !(bandwidth_hz > 0.0) || !(carrier_hz > 0.0))
        throw ValidationError("SimConfig: snapshot_interval, bandwidth_hz and carrier_hz must be positive");
    if (!std::isfinite(snr_db) || !std::isfinite(rician_k_db) || !std::isfinite(activity_power_db) ||
        !std::isfinite(path_gain_db))
        throw ValidationError("SimConfig: snr_db, rician_k_db, activity_power_db and path_gain_db must be finite");
    if (!(nlos_blockage_db >= 0.0) || !std::isfinite(nlos_blockage_db))
        throw ValidationError("SimConfig: nlos_blockage_db must be finite and >= 0");
    if (diffuse_paths < 1)
        throw ValidationError("SimConfig: diffuse_paths must be >= 1");
}

RfChainModel RfChainModel::identity(std::size_t antennas, std::size_t subcarriers)
{
    RfChainModel rf;
    rf.amplitude.assign(antennas, 1.0);
    rf.phase.assign(antennas, 0.0);
    rf.cfo = RealMatrix(antennas, subcarriers);
    return rf;
}

RfChainModel RfChainModel::draw(std::size_t antennas, std::size_t subcarriers, std::uint64_t seed)
{
    Rng rng(seed);
    RfChainModel rf;
    rf.amplitude.resize(antennas);
    rf.phase.resize(antennas);
    rf.cfo = RealMatrix(antennas, subcarriers);
    for (std::size_t m = 0; m < antennas; ++m)
    {
        rf.amplitude[m] = uniform(rng, 0.8, 1.2);
        rf.phase[m] = uniform(rng, 0.0, 2.0 * kPi);
    }
    for (std::size_t f = 0; f < subcarriers; ++f)
        for (std::size_t m = 0; m < antennas; ++m)
            rf.cfo(m, f) = uniform(rng, -0.01, 0.01);
    return rf;
}

std::vector<ArrayPosition> array_layout(std::size_t antennas)
{
    std::vector<ArrayPosition> pos(antennas);
    const bool planar = antennas % 4 == 0;
    const std::size_t cols = planar ? antennas / 4 : antennas;
    for (std::size_t m = 0; m < antennas; ++m)
        pos[m] = {double(m / cols), double(m % cols)};
    return pos;
}

ChannelParams draw_channel_params(const SimConfig &cfg, ActivityKind kind)
{
    cfg.validate();
    Rng rng = make_rng(cfg.seed, kStreamChannel);
    ChannelParams params;
    params.kind = kind;

    // Diffuse static paths, exponential power profile normalized to 1.
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> powers(cfg.diffuse_paths);
    double total = 0.0;
    for (auto &p : powers)
        total += (p = expo(rng));
    for (double p : powers)
    {
        PathParams path;
        path.gain = random_phasor(rng, p / total);
        path.azimuth = uniform(rng, -60.0, 60.0) * kDeg;
        path.elevation = uniform(rng, -20.0, 20.0) * kDeg;
        path.delay_s = uniform(rng, 10e-9, 150e-9);
        params.paths.push_back(path);
    }
    double static_power = 1.0;
    if (cfg.scenario == Scenario::Los)
    {
        const double k = std::pow(10.0, cfg.rician_k_db / 10.0);
        PathParams los;
        los.gain = random_phasor(rng, k);
        los.azimuth = uniform(rng, -45.0, 45.0) * kDeg;
        los.elevation = uniform(rng, -5.0, 5.0) * kDeg;
        los.delay_s = uniform(rng, 5e-9, 10e-9);
        params.paths.push_back(los);
        static_power += k;
    }

    const double activity_power = static_power * std::pow(10.0, cfg.activity_power_db / 10.0);
    switch (kind)
    {
    case ActivityKind::A1Static:
        // Person, wheel or balloon present but motionless.
        params.paths.push_back(activity_path(rng, activity_power));
        break;
    case ActivityKind::A2Periodic: {
        PathParams p = activity_path(rng, activity_power);
        p.motion = PathMotion::Periodic;
        p.period_s = uniform(rng, 0.5, 2.0);
        p.depth = uniform(rng, 0.5, 0.9);
        p.offset = uniform(rng, 0.0, 2.0 * kPi);
        params.paths.push_back(p);
        break;
    }
    case ActivityKind::A3Random:
        for (std::size_t n = 0; n < kRandomActivityPaths; ++n)
        {
            PathParams p = activity_path(rng, activity_power);
            p.motion = PathMotion::RandomWalk;
            p.walk_sigma = uniform(rng, 0.4, 0.8);
            p.walk_seed = rng();
            params.paths.push_back(p);
        }
        break;
    case ActivityKind::A4RotateShift: {
        PathParams p = activity_path(rng, activity_power);
        p.motion = PathMotion::Rotating;
        p.doppler_hz = random_sign(rng) * uniform(rng, 2.0, 20.0);
        // Fast enough that the phase ramp across the band turns by a
        // noticeable fraction of a cycle within a one-second window.
        p.delay_rate = random_sign(rng) * uniform(rng, 40e-9, 100e-9);
        params.paths.push_back(p);
        break;
    }
    case ActivityKind::A5Rotate: {
        PathParams p = activity_path(rng, activity_power);
        p.motion = PathMotion::Rotating;
        p.doppler_hz = random_sign(rng) * uniform(rng, 2.0, 20.0);
        params.paths.push_back(p);
        break;
    }
    }
    const double amplitude = std::pow(10.0, cfg.path_gain_db / 20.0);
    for (PathParams &p : params.paths)
        p.gain *= amplitude;
    return params;
}

ComplexTensor3 synthesize_channel(const SimConfig &cfg, const ChannelParams &params)
{
    cfg.validate();
    const std::size_t T = cfg.snapshots, F = cfg.subcarriers, M = cfg.antennas;
    const double dt = cfg.snapshot_interval;
    const double df = cfg.bandwidth_hz / double(F);
    const auto layout = array_layout(M);
    const auto &k = simd::active();

    ComplexTensor3 h({T, F, M});
    std::vector<cdouble> steer(M), freq(F), drifted(T);
    for (const PathParams &p : params.paths)
    {
        const double u = std::sin(p.azimuth) * std::cos(p.elevation);
        const double v = std::sin(p.elevation);
        for (std::size_t m = 0; m < M; ++m)
            steer[m] = std::polar(1.0, kPi * (layout[m].col * u + layout[m].row * v));
        for (std::size_t f = 0; f < F; ++f)
        {
            const double nu = (double(f) - 0.5 * double(F - 1)) * df;
            freq[f] = std::polar(1.0, -2.0 * kPi * nu * p.delay_s);
        }
        const std::vector<cdouble> s = modulation(p, T, dt);

        for (std::size_t f = 0; f < F; ++f)
        {
            const cdouble *column = s.data();
            if (p.delay_rate != 0.0)
            {
                const double nu = (double(f) - 0.5 * double(F - 1)) * df;
                for (std::size_t t = 0; t < T; ++t)
                    drifted[t] = s[t] * std::polar(1.0, -2.0 * kPi * nu * p.delay_rate * double(t) * dt);
                column = drifted.data();
            }
            for (std::size_t m = 0; m < M; ++m)
                k.caxpy(p.gain * freq[f] * steer[m], column, &h(0, f, m), T);
        }
    }
    return h;
}

ComplexTensor3 generate_channel(const SimConfig &cfg, ActivityKind kind)
{
    return synthesize_channel(cfg, draw_channel_params(cfg, kind));
}

ComplexTensor3 apply_rf_chain(const ComplexTensor3 &h, const RfChainModel &rf)
{
    const Dims3 d = h.dims();
    if (rf.amplitude.size() != d.d3 || rf.phase.size() != d.d3 || rf.cfo.rows() != d.d3 || rf.cfo.cols() != d.d2)
        throw ContractError("apply_rf_chain: RF model is " + std::to_string(rf.antennas()) + " antennas x " +
                            std::to_string(rf.subcarriers()) + " subcarriers, tensor dims " + to_string(d));
    ComplexTensor3 out(d);
    for (std::size_t m = 0; m < d.d3; ++m)
        for (std::size_t f = 0; f < d.d2; ++f)
        {
            const double eta = rf.cfo(m, f);
            for (std::size_t t = 0; t < d.d1; ++t)
                out(t, f, m) = h(t, f, m) * std::polar(rf.amplitude[m], rf.phase[m] - double(t) * eta);
        }
    return out;
}

ComplexTensor3 add_noise(const ComplexTensor3 &y, double snr_db, std::uint64_t seed)
{
    const double power = frobenius_norm(y) * frobenius_norm(y) / double(y.size());
    if (!(power > 0.0))
        throw DataError("add_noise: input has zero power, SNR is undefined");
    const double noise_var = power / std::pow(10.0, snr_db / 10.0);
    std::normal_distribution<double> n(0.0, std::sqrt(noise_var / 2.0));
    Rng rng(seed);
    ComplexTensor3 out(y.dims());
    auto o = out.data();
    auto x = y.data();
    for (std::size_t i = 0; i < o.size(); ++i)
    {
        const double re = n(rng);
        const double im = n(rng);
        o[i] = x[i] + cdouble(re, im);
    }
    return out;
}

FrameLossResult inject_frame_loss(const ComplexTensor3 &y, double p, std::uint64_t seed)
{
    if (!(p >= 0.0 && p < 0.5))
        throw ContractError("inject_frame_loss: probability must lie in [0, 0.5)");
    const Dims3 d = y.dims();
    FrameLossResult r{y, std::vector<bool>(d.d1, false)};
    if (p == 0.0 || d.d1 < 3)
        return r;
    Rng rng(seed);
    std::bernoulli_distribution lost(p);
    for (std::size_t t = 1; t + 1 < d.d1; ++t)
        if (lost(rng))
        {
            r.mask[t] = true;
            for (std::size_t m = 0; m < d.d3; ++m)
                for (std::size_t f = 0; f < d.d2; ++f)
                    r.tensor(t, f, m) = 0.0;
        }
    return r;
}

SimulatedRecord simulate_record(const SimConfig &cfg, ActivityKind kind)
{
    cfg.validate();
    const ComplexTensor3 h = generate_channel(cfg, kind);
    const RfChainModel rf = RfChainModel::draw(cfg.antennas, cfg.subcarriers, derive_seed(cfg.seed, kStreamRf));
    const ComplexTensor3 y =
        add_noise(apply_rf_chain(h, rf), cfg.effective_snr_db(), derive_seed(cfg.seed, kStreamNoise));
    FrameLossResult lost = inject_frame_loss(y, cfg.frame_loss_prob, derive_seed(cfg.seed, kStreamLoss));
    return {std::move(lost.tensor), std::move(lost.mask), kind, cfg};
}

} // namespace mmsense
