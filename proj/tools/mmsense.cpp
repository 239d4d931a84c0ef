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


// Command-line front end:
//
//   mmsense simulate                 [options]
//   mmsense featurize      <dataset> [options]
//   mmsense train-eval     <features> [options]
//   mmsense sweep-antennas <dataset> [options]
//   mmsense control        <dataset or features> [options]
//
// Exit codes: 0 success, 2 invalid manifest or arguments, 3 unusable data
// or I/O failure, 4 numeric failure, 1 internal error.

#include "mmsense/error.hpp"
#include "mmsense/pipeline.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace mmsense;

namespace
{

struct Common
{
    std::string manifest;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t workers = 0;
    bool verbose = false;
};

void add_common(CLI::App *sub, Common &c)
{
    sub->add_option("--manifest", c.manifest, "Experiment manifest (JSON); defaults apply when omitted");
    sub->add_option("--out", c.out, "Output directory (default: <output_dir>/<command>-<digest>)");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&c](std::uint64_t s) {
            c.seed = s;
            c.seed_set = true;
        },
        "Override the simulation, ALS and training seeds");
    sub->add_option("--workers", c.workers, "Worker threads (default: hardware concurrency)");
    sub->add_flag("--verbose", c.verbose, "Log progress to stderr");
}

ExperimentManifest manifest_for(const Common &c)
{
    ExperimentManifest m = c.manifest.empty() ? ExperimentManifest{} : load_manifest(c.manifest);
    if (c.seed_set)
        m.set_seed(c.seed);
    m.validate();
    return m;
}

RunOptions options_for(const Common &c)
{
    RunOptions o;
    o.workers = c.workers > 0 ? c.workers : std::max(1u, std::thread::hardware_concurrency());
    if (c.verbose)
        o.log = [](const std::string &line) { std::cerr << line << '\n'; };
    return o;
}

fs::path output_for(const Common &c, const ExperimentManifest &m, const std::string &command,
                    const std::string &input)
{
    if (!c.out.empty())
        return c.out;
    const std::string label = input.empty() ? std::string() : fs::absolute(input).lexically_normal().string();
    return default_output_dir(m, command, label);
}

void finish(const fs::path &dir, const ExperimentManifest &m)
{
    fs::create_directories(dir);
    std::ofstream(dir / "manifest.json", std::ios::binary) << manifest_to_json(m) << '\n';
    std::cout << dir.string() << '\n';
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Activity sensing from massive-MIMO channel tensors"};
    app.require_subcommand(1);

    Common c;
    std::string input;

    CLI::App *sim = app.add_subcommand("simulate", "Simulate a dataset of channel records");
    add_common(sim, c);

    CLI::App *feat = app.add_subcommand("featurize", "Extract CP-weight features from a dataset");
    feat->add_option("dataset", input, "Dataset directory")->required();
    add_common(feat, c);

    CLI::App *train = app.add_subcommand("train-eval", "Train the classifier and evaluate on a held-out split");
    train->add_option("features", input, "Feature directory")->required();
    add_common(train, c);

    CLI::App *sweep = app.add_subcommand("sweep-antennas", "Accuracy against the number of antennas");
    sweep->add_option("dataset", input, "Dataset directory")->required();
    add_common(sweep, c);

    CLI::App *ctl = app.add_subcommand("control", "Early/late leakage control per activity");
    ctl->add_option("input", input, "Dataset directory, or a feature directory")->required();
    add_common(ctl, c);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        const ExperimentManifest m = manifest_for(c);
        const RunOptions opt = options_for(c);

        if (sim->parsed())
        {
            const fs::path out = output_for(c, m, "simulate", "");
            simulate_dataset(m, out, opt);
            finish(out, m);
        }
        else if (feat->parsed())
        {
            const fs::path out = output_for(c, m, "featurize", input);
            const FeatureTable t = featurize_dataset(m, input, 0, opt);
            write_features(out, t, m.drop_largest);
            finish(out, m);
        }
        else if (train->parsed())
        {
            const fs::path out = output_for(c, m, "train-eval", input);
            const EvalReport r = train_eval(read_features(input), m);
            write_eval(out, r, m);
            finish(out, m);
        }
        else if (sweep->parsed())
        {
            const fs::path out = output_for(c, m, "sweep-antennas", input);
            const auto rows = sweep_antennas(m, [&](std::size_t antennas) {
                if (opt.log)
                    opt.log("sweep: featurizing with " + std::to_string(antennas) + " antennas");
                return featurize_dataset(m, input, antennas, opt);
            });
            write_sweep(out, rows);
            finish(out, m);
        }
        else if (ctl->parsed())
        {
            const fs::path out = output_for(c, m, "control", input);
            const FeatureTable t = fs::exists(fs::path(input) / "features.bin")
                                       ? read_features(input)
                                       : featurize_dataset(m, input, 0, opt);
            write_control(out, control(t, m));
            finish(out, m);
        }
        return 0;
    }
    catch (const ValidationError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const ContractError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const DataError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    catch (const fs::filesystem_error &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    catch (const NumericError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    catch (const std::exception &e)
    {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
