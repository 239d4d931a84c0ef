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

#include "mmsense/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <unistd.h>
#include <sstream>

using namespace mmsense;
namespace fs = std::filesystem;

namespace
{

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir
{
    fs::path path;
    explicit TempDir(const std::string &tag)
    {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("mmsense-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Small, fast manifest: 3 windows per record.
ExperimentManifest tiny(std::size_t per_activity = 1)
{
    ExperimentManifest m;
    m.sim.snapshots = 300;
    m.sim.subcarriers = 4;
    m.sim.antennas = 8;
    m.t_w = 100;
    m.als.rank = 3;
    m.als.max_iters = 8;
    m.als.rel_tol = 1e-4;
    m.train.epochs = 15;
    m.experiments_per_activity.fill(per_activity);
    m.antenna_sweep = {4, 8};
    m.set_seed(5);
    return m;
}

std::size_t count_files(const fs::path &dir)
{
    std::size_t n = 0;
    for (const auto &e : fs::directory_iterator(dir))
        n += e.is_regular_file();
    return n;
}

bool same_tables(const FeatureTable &a, const FeatureTable &b)
{
    if (a.r_max != b.r_max || a.rows.size() != b.rows.size())
        return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        const FeatureRow &x = a.rows[i], &y = b.rows[i];
        if (x.window_id != y.window_id || x.label != y.label || x.record != y.record || x.start != y.start ||
            x.lambdas != y.lambdas)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("manifest JSON round trip, defaults and validation")
{
    const ExperimentManifest d;
    CHECK(d.experiments_per_activity == std::array<std::size_t, 5>{36, 18, 18, 18, 18});
    CHECK(d.total_records() == 108);
    CHECK(d.r_max() == 100);
    CHECK(d.t_w == 200);
    CHECK(d.antenna_sweep == std::vector<std::size_t>{3, 10, 25, 50, 75, 100});

    ExperimentManifest m = tiny(2);
    m.sim.scenario = Scenario::Nlos;
    m.sim.frame_loss_prob = 0.05;
    const std::string text = manifest_to_json(m);
    const ExperimentManifest back = manifest_from_json(text);
    CHECK(manifest_to_json(back) == text);
    CHECK(back.sim.scenario == Scenario::Nlos);
    CHECK(back.experiments_per_activity == m.experiments_per_activity);
    CHECK(back.antenna_sweep == m.antenna_sweep);

    // Missing keys keep defaults.
    CHECK(manifest_to_json(manifest_from_json("{}")) == manifest_to_json(ExperimentManifest{}));

    CHECK_THROWS_AS(manifest_from_json(R"({"t_w": 10, "colour": 1})"), ValidationError);
    CHECK_THROWS_AS(manifest_from_json(R"({"sim": {"snaphots": 10}})"), ValidationError);
    CHECK_THROWS_AS(manifest_from_json("not json"), ValidationError);

    ExperimentManifest bad = tiny();
    bad.antenna_sweep = {8, 4};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad.antenna_sweep = {4, 9};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = tiny();
    bad.t_w = 301;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("seed override moves every seed together")
{
    ExperimentManifest m;
    m.set_seed(42);
    CHECK(m.sim.seed == 42);
    CHECK(m.als.seed == 42);
    CHECK(m.train.seed == 42);
}

TEST_CASE("record plan counts and names")
{
    const auto full = plan_records(ExperimentManifest{});
    CHECK(full.size() == 108);
    CHECK(std::count_if(full.begin(), full.end(), [](const RecordInfo &r) { return r.label == ActivityKind::A1Static; }) == 36);
    CHECK(full.front().name == "r0000_A1_e00");
    CHECK(full[36].name == "r0036_A2_e00");
    for (std::size_t i = 0; i < full.size(); ++i)
        CHECK(full[i].index == i);

    const auto ones = plan_records(tiny(1));
    REQUIRE(ones.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(ones[i].label == activity_from_index(i));
    // Distinct per-record seeds.
    CHECK(ones[0].seed != ones[1].seed);
}

TEST_CASE("loss-mask run-length encoding")
{
    CHECK(rle_encode({}).empty());
    CHECK(rle_encode({false, false, true, false}) == std::vector<std::size_t>{2, 1, 1});
    CHECK(rle_encode({true, true, false}) == std::vector<std::size_t>{0, 2, 1});
    CHECK(rle_decode({0, 2, 1}) == std::vector<bool>{true, true, false});

    std::mt19937_64 rng(3);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<bool> mask(1 + trial * 7);
        for (std::size_t i = 0; i < mask.size(); ++i)
            mask[i] = coin(rng);
        CHECK(rle_decode(rle_encode(mask)) == mask);
    }
}

TEST_CASE("record files round trip and datasets are reproducible")
{
    ExperimentManifest m = tiny(1);
    m.sim.frame_loss_prob = 0.1;
    TempDir a("ds-a"), b("ds-b");
    const auto info = simulate_dataset(m, a.path, RunOptions{});
    simulate_dataset(m, b.path, RunOptions{2, nullptr});
    REQUIRE(info.size() == 5);
    CHECK(count_files(a.path) == 2 * 5 + 1);
    for (const auto &e : fs::directory_iterator(a.path))
        CHECK(slurp(e.path()) == slurp(b.path / e.path().filename()));

    const SimulatedRecord direct = simulate_one(m, info[2]);
    const SimulatedRecord loaded = read_record(a.path, info[2].name);
    CHECK(loaded.tensor == direct.tensor);
    CHECK(loaded.mask == direct.mask);
    CHECK(loaded.label == ActivityKind::A3Random);
    CHECK(loaded.manifest.seed == info[2].seed);

    const auto index = read_dataset_index(a.path);
    REQUIRE(index.size() == 5);
    CHECK(index[4].name == info[4].name);
    CHECK(index[4].label == ActivityKind::A5Rotate);
}

TEST_CASE("featurize row counts, widths and worker independence")
{
    const ExperimentManifest m = tiny(1);
    const FeatureTable t = featurize_simulated(m, 0, RunOptions{});
    CHECK(t.rows.size() == 15);
    CHECK(t.class_counts() == std::array<std::size_t, 5>{3, 3, 3, 3, 3});
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(t.rows[i].window_id == i);
    const LabeledDataset ds = to_dataset(t, true);
    CHECK(ds.dim == 31 * (m.r_max() - 1));
    CHECK(ds.size() == 15);

    const FeatureTable t3 = featurize_simulated(m, 0, RunOptions{3, nullptr});
    CHECK(same_tables(t, t3));

    TempDir d("feat");
    simulate_dataset(m, d.path / "ds", RunOptions{});
    const FeatureTable from_disk = featurize_dataset(m, d.path / "ds", 0, RunOptions{});
    CHECK(same_tables(t, from_disk));
}

TEST_CASE("feature files round trip")
{
    const ExperimentManifest m = tiny(1);
    const FeatureTable t = featurize_simulated(m, 0, RunOptions{});
    TempDir d("ff");
    write_features(d.path, t, true);
    for (const char *f : {"features.csv", "features.bin", "features.schema.json", "features.summary.json", "windows.csv"})
        CHECK(fs::exists(d.path / f));
    const FeatureTable back = read_features(d.path);
    CHECK(same_tables(t, back));

    std::istringstream csv(slurp(d.path / "features.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("window_id,label,lambda1_1,", 0) == 0);
    CHECK(std::count(header.begin(), header.end(), ',') == 1 + 31 * 3);
    std::size_t lines = 0;
    for (std::string line; std::getline(csv, line);)
        ++lines;
    CHECK(lines == 15);

    // A damaged binary is rejected.
    const std::string bin = slurp(d.path / "features.bin");
    std::ofstream(d.path / "features.bin", std::ios::binary | std::ios::trunc) << bin.substr(0, bin.size() / 2);
    CHECK_THROWS_AS(read_features(d.path), DataError);
}

TEST_CASE("corrupt records are skipped up to 10% and abort beyond")
{
    const ExperimentManifest m = tiny(2); // 10 records
    TempDir d("corrupt");
    const auto info = simulate_dataset(m, d.path, RunOptions{});
    std::vector<std::string> logged;
    RunOptions opt;
    opt.log = [&logged](const std::string &s) { logged.push_back(s); };

    std::ofstream(d.path / (info[3].name + ".mmt3"), std::ios::binary | std::ios::trunc) << "MMT3";
    const FeatureTable t = featurize_dataset(m, d.path, 0, opt);
    CHECK(t.skipped_records == std::vector<std::string>{info[3].name});
    CHECK(t.rows.size() == 27);
    CHECK(std::any_of(logged.begin(), logged.end(),
                      [&](const std::string &s) { return s.find("skipping " + info[3].name) != std::string::npos; }));

    fs::remove(d.path / (info[7].name + ".mmt3"));
    CHECK_THROWS_AS(featurize_dataset(m, d.path, 0, RunOptions{}), DataError);
}

TEST_CASE("train-eval accounting and reproducibility")
{
    const ExperimentManifest m = tiny(3);
    const FeatureTable t = featurize_simulated(m, 0, RunOptions{});
    const EvalReport a = train_eval(t, m);
    const EvalReport b = train_eval(t, m);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.train_size + a.test_size == t.rows.size());
    CHECK(a.confusion.total() == a.test_size);
    CHECK(a.loss_history.size() == m.train.epochs);

    // Confusion row sums are the test-set class counts.
    const LabeledDataset ds = to_dataset(t, m.drop_largest);
    const Split s = split(ds, m.train.split_fraction, m.train.seed);
    for (std::size_t c = 0; c < 5; ++c)
    {
        std::size_t row = 0, expect = 0;
        for (std::size_t p = 0; p < 5; ++p)
            row += a.confusion.at(c, p);
        for (std::size_t i = 0; i < s.test.size(); ++i)
            expect += s.test.labels[i] == c;
        CHECK(row == expect);
    }

    TempDir d1("eval1"), d2("eval2");
    write_eval(d1.path, a, m);
    write_eval(d2.path, b, m);
    for (const char *f : {"metrics.json", "confusion.csv", "loss.csv", "model.ckpt"})
    {
        CAPTURE(f);
        CHECK(slurp(d1.path / f) == slurp(d2.path / f));
    }
}

TEST_CASE("antenna sweep rows and consistency with train-eval")
{
    ExperimentManifest m = tiny(3);
    m.antenna_sweep = {2, 4, 8};
    std::vector<std::size_t> asked;
    const auto rows = sweep_antennas(m, [&](std::size_t M) {
        asked.push_back(M);
        return featurize_simulated(m, M, RunOptions{});
    });
    CHECK(asked == m.antenna_sweep);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].antennas == 2);
    CHECK(rows[2].antennas == 8);
    const double full = train_eval(featurize_simulated(m, 0, RunOptions{}), m).accuracy;
    CHECK(rows[2].accuracy == full);

    TempDir d("sweep");
    write_sweep(d.path, rows);
    const std::string csv = slurp(d.path / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind("antennas,windows,accuracy\n2,", 0) == 0);
}

TEST_CASE("control reports one row per activity and detects drift")
{
    ExperimentManifest m = tiny(1);
    m.train.epochs = 200;
    // Hand-made table: 8 records x 10 windows per activity, A1 and A2 only.
    FeatureTable t;
    t.r_max = 3;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    std::size_t id = 0;
    for (ActivityKind k : {ActivityKind::A1Static, ActivityKind::A2Periodic})
        for (std::size_t rec = 0; rec < 8; ++rec)
            for (std::size_t w = 0; w < 10; ++w)
            {
                FeatureRow r;
                r.window_id = id++;
                r.record = "r" + std::to_string(rec);
                r.window = w;
                r.start = w * 10;
                r.length = 10;
                r.record_snapshots = 100;
                r.label = k;
                r.lambdas.assign(31, std::vector<double>(3));
                for (auto &v : r.lambdas)
                    for (double &x : v)
                        x = n(rng);
                // Every A2 weight drifts over the record.
                if (k == ActivityKind::A2Periodic)
                    for (auto &v : r.lambdas)
                        for (double &x : v)
                            x += 2.0 * double(w);
                t.rows.push_back(std::move(r));
            }
    const auto rows = control(t, m);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].activity == ActivityKind::A1Static);
    CHECK(rows[1].activity == ActivityKind::A2Periodic);
    CHECK(rows[1].result.accuracy > 0.9);
    CHECK_FALSE(rows[1].pass);
    CHECK(rows[0].result.windows_used == 80);

    TempDir d("control");
    write_control(d.path, rows);
    const std::string json = slurp(d.path / "control.json");
    CHECK(json.find("\"verdict\": \"fail\"") != std::string::npos);
    const std::string csv = slurp(d.path / "control.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("request digests name output directories")
{
    const ExperimentManifest m = tiny(1);
    const std::string d = request_digest(m, "/data/x");
    CHECK(d.size() == 16);
    CHECK(d == request_digest(tiny(1), "/data/x"));
    CHECK(d != request_digest(m, "/data/y"));
    ExperimentManifest other = tiny(1);
    other.set_seed(6);
    CHECK(d != request_digest(other, "/data/x"));
    CHECK(default_output_dir(m, "featurize", "/data/x") == fs::path(m.output_dir) / ("featurize-" + d));
}

TEST_CASE("window seeds are distinct across records and windows")
{
    std::set<std::uint64_t> seen;
    for (std::size_t r = 0; r < 20; ++r)
        for (std::size_t w = 0; w < 20; ++w)
            seen.insert(window_seed(9, r, w));
    CHECK(seen.size() == 400);
}
