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


#include "mmsense/pipeline.hpp"

#include "mmsense/error.hpp"
#include "mmsense/parallel.hpp"
#include "mmsense/preprocess.hpp"
#include "mmsense/random.hpp"
#include "mmsense/tensor_io.hpp"

#include "json.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mmsense
{

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace
{

constexpr double kSkipLimit = 0.10;
constexpr std::array<char, 4> kFeatureMagic{'M', 'M', 'F', '1'};

void log(const RunOptions &opt, const std::string &msg)
{
    if (opt.log)
        opt.log(msg);
}

std::string read_text(const fs::path &p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is)
        throw DataError("cannot open " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path &p, const std::string &text)
{
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os)
        throw DataError("cannot open " + p.string() + " for writing");
    os << text;
    if (!os)
        throw DataError("write failed: " + p.string());
}

void ensure_dir(const fs::path &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

json parse_json(const std::string &text, const std::string &what)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::exception &e)
    {
        throw DataError(what + ": " + e.what());
    }
}

// Copies obj[key] into out when present; rejects keys outside `allowed`.
class Reader
{
public:
    Reader(const json &obj, std::string where, std::set<std::string> allowed)
        : obj_(obj), where_(std::move(where))
    {
        if (!obj_.is_object())
            throw ValidationError("manifest: " + where_ + " must be an object");
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!allowed.count(it.key()))
                throw ValidationError("manifest: unknown key '" + it.key() + "' in " + where_);
    }

    template <class T> void get(const char *key, T &out) const
    {
        if (!obj_.contains(key))
            return;
        try
        {
            out = obj_.at(key).get<T>();
        }
        catch (const json::exception &e)
        {
            throw ValidationError("manifest: bad value for " + where_ + "." + key + ": " + e.what());
        }
    }

    const json *child(const char *key) const { return obj_.contains(key) ? &obj_.at(key) : nullptr; }

private:
    const json &obj_;
    std::string where_;
};

void put_u64(std::ostream &os, std::uint64_t v)
{
    char buf[8];
    for (int b = 0; b < 8; ++b)
        buf[b] = static_cast<char>((v >> (8 * b)) & 0xFFu);
    os.write(buf, 8);
}

std::uint64_t get_u64(std::istream &is)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8))
        throw DataError("features.bin: truncated");
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b)
        v = (v << 8) | buf[b];
    return v;
}

std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line)
    {
        if (c == ',')
        {
            out.push_back(cur);
            cur.clear();
        }
        else if (c != '\r')
            cur += c;
    }
    out.push_back(cur);
    return out;
}

std::size_t parse_size(const std::string &s, const std::string &what)
{
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw DataError(what + ": bad integer '" + s + "'");
    return v;
}

ojson nan_to_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

} // namespace

// ---------------------------------------------------------------- manifest

std::size_t ExperimentManifest::total_records() const
{
    std::size_t n = 0;
    for (std::size_t c : experiments_per_activity)
        n += c;
    return n;
}

void ExperimentManifest::set_seed(std::uint64_t seed)
{
    sim.seed = seed;
    als.seed = seed;
    train.seed = seed;
}

void ExperimentManifest::validate() const
{
    sim.validate();
    als.validate();
    train.validate();
    if (t_w == 0 || t_w > sim.snapshots)
        throw ValidationError("manifest: t_w must lie in [1, snapshots]");
    if (drop_largest && als.rank < 2)
        throw ValidationError("manifest: r_max must be >= 2 when the largest weight is dropped");
    if (total_records() == 0)
        throw ValidationError("manifest: no experiments requested");
    for (std::size_t i = 0; i < antenna_sweep.size(); ++i)
    {
        if (antenna_sweep[i] == 0 || antenna_sweep[i] > sim.antennas)
            throw ValidationError("manifest: antenna_sweep values must lie in [1, antennas]");
        if (i > 0 && antenna_sweep[i] <= antenna_sweep[i - 1])
            throw ValidationError("manifest: antenna_sweep must be strictly increasing");
    }
}

ExperimentManifest manifest_from_json(const std::string &text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::exception &e)
    {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    ExperimentManifest m;
    const Reader top(j, "manifest",
                     {"sim", "t_w", "r_max", "als", "train", "drop_largest", "experiments_per_activity",
                      "antenna_sweep", "output_dir", "seed"});
    if (const json *s = top.child("sim"))
    {
        const Reader r(*s, "sim",
                       {"snapshots", "subcarriers", "antennas", "snapshot_interval", "carrier_hz", "bandwidth_hz",
                        "scenario", "snr_db", "frame_loss_prob", "seed", "diffuse_paths", "rician_k_db",
                        "activity_power_db", "path_gain_db", "nlos_blockage_db"});
        r.get("snapshots", m.sim.snapshots);
        r.get("subcarriers", m.sim.subcarriers);
        r.get("antennas", m.sim.antennas);
        r.get("snapshot_interval", m.sim.snapshot_interval);
        r.get("carrier_hz", m.sim.carrier_hz);
        r.get("bandwidth_hz", m.sim.bandwidth_hz);
        std::string scen(to_string(m.sim.scenario));
        r.get("scenario", scen);
        m.sim.scenario = parse_scenario(scen);
        r.get("snr_db", m.sim.snr_db);
        r.get("frame_loss_prob", m.sim.frame_loss_prob);
        r.get("seed", m.sim.seed);
        r.get("diffuse_paths", m.sim.diffuse_paths);
        r.get("rician_k_db", m.sim.rician_k_db);
        r.get("activity_power_db", m.sim.activity_power_db);
        r.get("path_gain_db", m.sim.path_gain_db);
        r.get("nlos_blockage_db", m.sim.nlos_blockage_db);
    }
    top.get("t_w", m.t_w);
    top.get("r_max", m.als.rank);
    if (const json *a = top.child("als"))
    {
        const Reader r(*a, "als", {"max_iters", "rel_tol", "seed"});
        r.get("max_iters", m.als.max_iters);
        r.get("rel_tol", m.als.rel_tol);
        r.get("seed", m.als.seed);
    }
    if (const json *t = top.child("train"))
    {
        const Reader r(*t, "train",
                       {"learning_rate", "beta1", "beta2", "epsilon", "epochs", "batch_size", "split_fraction",
                        "seed"});
        r.get("learning_rate", m.train.learning_rate);
        r.get("beta1", m.train.beta1);
        r.get("beta2", m.train.beta2);
        r.get("epsilon", m.train.epsilon);
        r.get("epochs", m.train.epochs);
        r.get("batch_size", m.train.batch_size);
        r.get("split_fraction", m.train.split_fraction);
        r.get("seed", m.train.seed);
    }
    top.get("drop_largest", m.drop_largest);
    if (const json *e = top.child("experiments_per_activity"))
    {
        const Reader r(*e, "experiments_per_activity", {"A1", "A2", "A3", "A4", "A5"});
        for (ActivityKind k : kAllActivities)
            r.get(std::string(to_string(k)).c_str(), m.experiments_per_activity[class_index(k)]);
    }
    top.get("antenna_sweep", m.antenna_sweep);
    top.get("output_dir", m.output_dir);
    if (j.contains("seed"))
    {
        std::uint64_t seed = 0;
        top.get("seed", seed);
        m.set_seed(seed);
    }
    m.validate();
    return m;
}

std::string manifest_to_json(const ExperimentManifest &m)
{
    ojson j;
    j["sim"] = {{"snapshots", m.sim.snapshots},
                {"subcarriers", m.sim.subcarriers},
                {"antennas", m.sim.antennas},
                {"snapshot_interval", m.sim.snapshot_interval},
                {"carrier_hz", m.sim.carrier_hz},
                {"bandwidth_hz", m.sim.bandwidth_hz},
                {"scenario", std::string(to_string(m.sim.scenario))},
                {"snr_db", m.sim.snr_db},
                {"frame_loss_prob", m.sim.frame_loss_prob},
                {"seed", m.sim.seed},
                {"diffuse_paths", m.sim.diffuse_paths},
                {"rician_k_db", m.sim.rician_k_db},
                {"activity_power_db", m.sim.activity_power_db},
                {"path_gain_db", m.sim.path_gain_db},
                {"nlos_blockage_db", m.sim.nlos_blockage_db}};
    j["t_w"] = m.t_w;
    j["r_max"] = m.als.rank;
    j["als"] = {{"max_iters", m.als.max_iters}, {"rel_tol", m.als.rel_tol}, {"seed", m.als.seed}};
    j["train"] = {{"learning_rate", m.train.learning_rate}, {"beta1", m.train.beta1},
                  {"beta2", m.train.beta2},                 {"epsilon", m.train.epsilon},
                  {"epochs", m.train.epochs},               {"batch_size", m.train.batch_size},
                  {"split_fraction", m.train.split_fraction}, {"seed", m.train.seed}};
    j["drop_largest"] = m.drop_largest;
    ojson e;
    for (ActivityKind k : kAllActivities)
        e[std::string(to_string(k))] = m.experiments_per_activity[class_index(k)];
    j["experiments_per_activity"] = e;
    j["antenna_sweep"] = m.antenna_sweep;
    j["output_dir"] = m.output_dir;
    return j.dump(2) + "\n";
}

ExperimentManifest load_manifest(const fs::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ValidationError("cannot open manifest " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return manifest_from_json(ss.str());
}

std::string request_digest(const ExperimentManifest &m, const std::string &input)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto feed = [&h](const std::string &text) {
        for (unsigned char c : text)
        {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    feed(manifest_to_json(m));
    feed(std::string(1, '\0'));
    feed(input);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

fs::path default_output_dir(const ExperimentManifest &m, const std::string &command, const std::string &input)
{
    return fs::path(m.output_dir) / (command + "-" + request_digest(m, input));
}

// ----------------------------------------------------------------- records

std::vector<RecordInfo> plan_records(const ExperimentManifest &m)
{
    std::vector<RecordInfo> out;
    for (ActivityKind k : kAllActivities)
        for (std::size_t e = 0; e < m.experiments_per_activity[class_index(k)]; ++e)
        {
            RecordInfo r;
            r.index = out.size();
            r.label = k;
            r.experiment = e;
            r.seed = derive_seed(m.sim.seed, r.index);
            char buf[64];
            std::snprintf(buf, sizeof buf, "r%04zu_%s_e%02zu", r.index, std::string(to_string(k)).c_str(), e);
            r.name = buf;
            out.push_back(std::move(r));
        }
    return out;
}

SimulatedRecord simulate_one(const ExperimentManifest &m, const RecordInfo &r)
{
    SimConfig cfg = m.sim;
    cfg.seed = r.seed;
    return simulate_record(cfg, r.label);
}

std::vector<std::size_t> rle_encode(const std::vector<bool> &mask)
{
    std::vector<std::size_t> runs;
    if (mask.empty())
        return runs;
    bool cur = false;
    std::size_t len = 0;
    for (bool b : mask)
    {
        if (b != cur)
        {
            runs.push_back(len);
            cur = b;
            len = 0;
        }
        ++len;
    }
    runs.push_back(len);
    return runs;
}

std::vector<bool> rle_decode(const std::vector<std::size_t> &runs)
{
    std::vector<bool> mask;
    bool cur = false;
    for (std::size_t n : runs)
    {
        mask.insert(mask.end(), n, cur);
        cur = !cur;
    }
    return mask;
}

void write_record(const fs::path &dir, const RecordInfo &info, const SimulatedRecord &rec)
{
    io::write_tensor(dir / (info.name + ".mmt3"), rec.tensor);
    const Dims3 d = rec.tensor.dims();
    ojson j;
    j["record"] = info.name;
    j["index"] = info.index;
    j["experiment"] = info.experiment;
    j["dims"] = {d.d1, d.d2, d.d3};
    j["scenario"] = std::string(to_string(rec.manifest.scenario));
    j["activity"] = std::string(to_string(rec.label));
    j["seed"] = rec.manifest.seed;
    j["snr_db"] = rec.manifest.snr_db;
    j["frame_loss_prob"] = rec.manifest.frame_loss_prob;
    j["mask_rle"] = rle_encode(rec.mask);
    write_text(dir / (info.name + ".json"), j.dump(2) + "\n");
}

SimulatedRecord read_record(const fs::path &dir, const std::string &name)
{
    const json j = parse_json(read_text(dir / (name + ".json")), name + ".json");
    SimulatedRecord rec;
    try
    {
        rec.tensor = io::read_complex_tensor(dir / (name + ".mmt3"));
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        if (dims.size() != 3 || Dims3{dims[0], dims[1], dims[2]} != rec.tensor.dims())
            throw DataError(name + ": sidecar dims do not match the tensor");
        rec.label = parse_activity(j.at("activity").get<std::string>());
        rec.mask = rle_decode(j.at("mask_rle").get<std::vector<std::size_t>>());
        rec.manifest.scenario = parse_scenario(j.at("scenario").get<std::string>());
        rec.manifest.seed = j.at("seed").get<std::uint64_t>();
        rec.manifest.snr_db = j.at("snr_db").get<double>();
        rec.manifest.frame_loss_prob = j.at("frame_loss_prob").get<double>();
    }
    catch (const json::exception &e)
    {
        throw DataError(name + ".json: " + e.what());
    }
    catch (const ValidationError &e)
    {
        throw DataError(name + ".json: " + e.what());
    }
    if (rec.mask.size() != rec.tensor.dims().d1)
        throw DataError(name + ": loss mask length does not match T");
    const Dims3 d = rec.tensor.dims();
    rec.manifest.snapshots = d.d1;
    rec.manifest.subcarriers = d.d2;
    rec.manifest.antennas = d.d3;
    return rec;
}

std::vector<RecordInfo> simulate_dataset(const ExperimentManifest &m, const fs::path &dir, const RunOptions &opt)
{
    m.validate();
    ensure_dir(dir);
    const std::vector<RecordInfo> plan = plan_records(m);
    parallel_for(plan.size(), opt.workers, [&](std::size_t i) {
        write_record(dir, plan[i], simulate_one(m, plan[i]));
        log(opt, "simulated " + plan[i].name);
    });
    ojson idx;
    idx["records"] = ojson::array();
    for (const RecordInfo &r : plan)
        idx["records"].push_back({{"name", r.name},
                                  {"index", r.index},
                                  {"activity", std::string(to_string(r.label))},
                                  {"experiment", r.experiment},
                                  {"seed", r.seed}});
    write_text(dir / "dataset.json", idx.dump(2) + "\n");
    return plan;
}

std::vector<RecordInfo> read_dataset_index(const fs::path &dir)
{
    const json j = parse_json(read_text(dir / "dataset.json"), "dataset.json");
    std::vector<RecordInfo> out;
    try
    {
        for (const json &r : j.at("records"))
        {
            RecordInfo info;
            info.name = r.at("name").get<std::string>();
            info.index = r.at("index").get<std::size_t>();
            info.label = parse_activity(r.at("activity").get<std::string>());
            info.experiment = r.at("experiment").get<std::size_t>();
            info.seed = r.at("seed").get<std::uint64_t>();
            out.push_back(std::move(info));
        }
    }
    catch (const json::exception &e)
    {
        throw DataError(std::string("dataset.json: ") + e.what());
    }
    catch (const ValidationError &e)
    {
        throw DataError(std::string("dataset.json: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------- features

std::array<std::size_t, kNumActivities> FeatureTable::class_counts() const
{
    std::array<std::size_t, kNumActivities> c{};
    for (const FeatureRow &r : rows)
        ++c[class_index(r.label)];
    return c;
}

std::uint64_t window_seed(std::uint64_t als_seed, std::size_t record_index, std::size_t window)
{
    return derive_seed(derive_seed(als_seed, record_index), window);
}

std::vector<FeatureRow> featurize_record(const ExperimentManifest &m, const RecordInfo &info,
                                         const SimulatedRecord &rec, std::size_t antennas, const RunOptions &opt,
                                         std::size_t *invalid_windows)
{
    ComplexTensor3 t = std::any_of(rec.mask.begin(), rec.mask.end(), [](bool b) { return b; })
                           ? interpolate_lost_frames(rec.tensor, rec.mask)
                           : rec.tensor;
    if (antennas != 0 && antennas != t.dims().d3)
        t = select_antennas(t, antennas);
    const std::size_t T = t.dims().d1;
    const WindowedRecord w = segment(t, m.t_w, rec.label);

    std::vector<FeatureSet> sets(w.k_count);
    parallel_for(w.k_count, opt.workers, [&](std::size_t k) {
        AlsConfig a = m.als;
        a.seed = window_seed(m.als.seed, info.index, k);
        sets[k] = extract_features(w.windows[k], a);
    });

    std::vector<FeatureRow> rows;
    for (std::size_t k = 0; k < w.k_count; ++k)
    {
        if (sets[k].invalid)
        {
            log(opt, info.name + " window " + std::to_string(k) + " excluded: " + sets[k].diagnostic);
            if (invalid_windows)
                ++*invalid_windows;
            continue;
        }
        if (sets[k].degenerate)
            log(opt, info.name + " window " + std::to_string(k) + ": " + sets[k].diagnostic);
        FeatureRow r;
        r.record = info.name;
        r.record_index = info.index;
        r.window = k;
        r.start = k * m.t_w;
        r.length = m.t_w;
        r.record_snapshots = T;
        r.label = rec.label;
        r.degenerate = sets[k].degenerate;
        r.lambdas = std::move(sets[k].lambdas);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace
{

FeatureTable assemble_table(const ExperimentManifest &m, std::size_t antennas,
                            std::vector<std::vector<FeatureRow>> per_record)
{
    FeatureTable t;
    t.r_max = m.r_max();
    t.antennas = antennas == 0 ? m.sim.antennas : antennas;
    for (auto &rows : per_record)
        for (FeatureRow &r : rows)
        {
            r.window_id = t.rows.size();
            t.degenerate_windows += r.degenerate ? 1 : 0;
            t.rows.push_back(std::move(r));
        }
    return t;
}

} // namespace

FeatureTable featurize_dataset(const ExperimentManifest &m, const fs::path &dataset_dir, std::size_t antennas,
                               const RunOptions &opt)
{
    m.validate();
    const std::vector<RecordInfo> index = read_dataset_index(dataset_dir);
    std::vector<std::vector<FeatureRow>> per_record(index.size());
    std::vector<std::string> skipped;
    std::size_t invalid = 0;
    for (std::size_t i = 0; i < index.size(); ++i)
    {
        SimulatedRecord rec;
        try
        {
            rec = read_record(dataset_dir, index[i].name);
            rec.label = index[i].label;
        }
        catch (const DataError &e)
        {
            log(opt, "skipping " + index[i].name + ": " + e.what());
            skipped.push_back(index[i].name);
            continue;
        }
        per_record[i] = featurize_record(m, index[i], rec, antennas, opt, &invalid);
        log(opt, "featurized " + index[i].name);
    }
    if (double(skipped.size()) > kSkipLimit * double(index.size()))
        throw DataError("featurize: " + std::to_string(skipped.size()) + " of " + std::to_string(index.size()) +
                        " records unreadable (limit 10%)");
    FeatureTable t = assemble_table(m, antennas, std::move(per_record));
    t.skipped_records = std::move(skipped);
    t.invalid_windows = invalid;
    return t;
}

FeatureTable featurize_simulated(const ExperimentManifest &m, std::size_t antennas, const RunOptions &opt)
{
    m.validate();
    const std::vector<RecordInfo> plan = plan_records(m);
    std::vector<std::vector<FeatureRow>> per_record(plan.size());
    std::size_t invalid = 0;
    for (std::size_t i = 0; i < plan.size(); ++i)
        per_record[i] = featurize_record(m, plan[i], simulate_one(m, plan[i]), antennas, opt, &invalid);
    FeatureTable t = assemble_table(m, antennas, std::move(per_record));
    t.invalid_windows = invalid;
    return t;
}

void write_features(const fs::path &dir, const FeatureTable &t, bool drop_largest)
{
    ensure_dir(dir);
    const std::size_t width = kNumFeatureTensors * t.r_max;
    {
        std::ostringstream csv;
        csv << "window_id,label";
        for (std::size_t i = 1; i <= kNumFeatureTensors; ++i)
            for (std::size_t l = 1; l <= t.r_max; ++l)
                csv << ",lambda" << i << '_' << l;
        csv << '\n';
        for (const FeatureRow &r : t.rows)
        {
            csv << r.window_id << ',' << to_string(r.label);
            for (const auto &v : r.lambdas)
                for (double x : v)
                    csv << ',' << format_double(x);
            csv << '\n';
        }
        write_text(dir / "features.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "window_id,record,record_index,window,start,length,record_snapshots,label,degenerate\n";
        for (const FeatureRow &r : t.rows)
            csv << r.window_id << ',' << r.record << ',' << r.record_index << ',' << r.window << ',' << r.start << ','
                << r.length << ',' << r.record_snapshots << ',' << to_string(r.label) << ',' << (r.degenerate ? 1 : 0)
                << '\n';
        write_text(dir / "windows.csv", csv.str());
    }
    {
        std::ofstream os(dir / "features.bin", std::ios::binary | std::ios::trunc);
        if (!os)
            throw DataError("cannot open features.bin for writing");
        os.write(kFeatureMagic.data(), kFeatureMagic.size());
        put_u64(os, t.rows.size());
        put_u64(os, t.r_max);
        for (const FeatureRow &r : t.rows)
        {
            put_u64(os, r.window_id);
            put_u64(os, class_index(r.label));
            for (const auto &v : r.lambdas)
                for (double x : v)
                    put_u64(os, std::bit_cast<std::uint64_t>(x));
        }
        if (!os)
            throw DataError("write failed: features.bin");
    }
    {
        ojson s;
        s["file"] = "features.bin";
        s["magic"] = "MMF1";
        s["byte_order"] = "little";
        s["header"] = {{{"name", "rows"}, {"type", "uint64"}}, {{"name", "r_max"}, {"type", "uint64"}}};
        s["row"] = {{{"name", "window_id"}, {"type", "uint64"}},
                    {{"name", "label"}, {"type", "uint64"}, {"classes", {"A1", "A2", "A3", "A4", "A5"}}},
                    {{"name", "lambdas"}, {"type", "float64"}, {"count", width}}};
        s["lambda_order"] = "tensor-major: tensor i (1..31) then weight l (1..r_max), descending within a tensor";
        s["tensors"] = feature_tensor_names();
        s["rows"] = t.rows.size();
        s["r_max"] = t.r_max;
        write_text(dir / "features.schema.json", s.dump(2) + "\n");
    }
    {
        ojson s;
        s["rows"] = t.rows.size();
        s["r_max"] = t.r_max;
        s["antennas"] = t.antennas;
        s["input_dimension"] = input_dimension(t.r_max, drop_largest);
        s["drop_largest"] = drop_largest;
        ojson counts;
        const auto c = t.class_counts();
        for (ActivityKind k : kAllActivities)
            counts[std::string(to_string(k))] = c[class_index(k)];
        s["windows_per_class"] = counts;
        s["skipped_records"] = t.skipped_records;
        s["invalid_windows"] = t.invalid_windows;
        s["degenerate_windows"] = t.degenerate_windows;
        write_text(dir / "features.summary.json", s.dump(2) + "\n");
    }
}

FeatureTable read_features(const fs::path &dir)
{
    FeatureTable t;
    std::ifstream is(dir / "features.bin", std::ios::binary);
    if (!is)
        throw DataError("cannot open " + (dir / "features.bin").string());
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kFeatureMagic)
        throw DataError("features.bin: bad magic");
    const std::uint64_t rows = get_u64(is);
    t.r_max = get_u64(is);
    if (rows > (1u << 24) || t.r_max == 0 || t.r_max > 4096)
        throw DataError("features.bin: implausible header");
    for (std::uint64_t i = 0; i < rows; ++i)
    {
        FeatureRow r;
        r.window_id = get_u64(is);
        const std::uint64_t label = get_u64(is);
        if (label >= kNumActivities)
            throw DataError("features.bin: bad label");
        r.label = activity_from_index(label);
        r.lambdas.assign(kNumFeatureTensors, std::vector<double>(t.r_max));
        for (auto &v : r.lambdas)
            for (double &x : v)
                x = std::bit_cast<double>(get_u64(is));
        t.rows.push_back(std::move(r));
    }

    std::istringstream win(read_text(dir / "windows.csv"));
    std::string line;
    std::getline(win, line);
    for (FeatureRow &r : t.rows)
    {
        if (!std::getline(win, line))
            throw DataError("windows.csv: fewer rows than features.bin");
        const auto f = split_csv_line(line);
        if (f.size() != 9 || parse_size(f[0], "windows.csv") != r.window_id)
            throw DataError("windows.csv: row does not match features.bin");
        r.record = f[1];
        r.record_index = parse_size(f[2], "windows.csv");
        r.window = parse_size(f[3], "windows.csv");
        r.start = parse_size(f[4], "windows.csv");
        r.length = parse_size(f[5], "windows.csv");
        r.record_snapshots = parse_size(f[6], "windows.csv");
        r.degenerate = f[8] == "1";
        t.degenerate_windows += r.degenerate ? 1 : 0;
    }

    const json s = parse_json(read_text(dir / "features.summary.json"), "features.summary.json");
    t.antennas = s.value("antennas", std::size_t{0});
    t.invalid_windows = s.value("invalid_windows", std::size_t{0});
    t.skipped_records = s.value("skipped_records", std::vector<std::string>{});
    return t;
}

LabeledDataset to_dataset(const FeatureTable &t, bool drop_largest)
{
    LabeledDataset ds;
    ds.num_classes = kNumActivities;
    ds.dim = input_dimension(t.r_max, drop_largest);
    for (const FeatureRow &r : t.rows)
    {
        FeatureSet fs;
        fs.lambdas = r.lambdas;
        ds.push_back(assemble_input(fs, drop_largest), class_index(r.label), r.record + "#" + std::to_string(r.window));
    }
    return ds;
}

// ------------------------------------------------------------ train / eval

EvalReport train_eval(const FeatureTable &t, const ExperimentManifest &m)
{
    const LabeledDataset ds = to_dataset(t, m.drop_largest);
    const Split s = split(ds, m.train.split_fraction, m.train.seed);
    TrainResult tr = train(s.train, m.train);
    EvalReport r;
    r.confusion = evaluate(tr.model, s.test);
    r.accuracy = r.confusion.accuracy();
    r.loss_history = std::move(tr.loss_history);
    r.model = std::move(tr.model);
    r.train_size = s.train.size();
    r.test_size = s.test.size();
    return r;
}

void write_eval(const fs::path &dir, const EvalReport &r, const ExperimentManifest &m)
{
    ensure_dir(dir);
    ojson j;
    j["accuracy"] = r.accuracy;
    j["train_size"] = r.train_size;
    j["test_size"] = r.test_size;
    j["seed"] = m.train.seed;
    j["epochs"] = m.train.epochs;
    j["classes"] = ojson::array();
    for (ActivityKind k : kAllActivities)
    {
        const std::size_t c = class_index(k);
        std::size_t support = 0;
        for (std::size_t p = 0; p < r.confusion.classes; ++p)
            support += r.confusion.at(c, p);
        j["classes"].push_back({{"activity", std::string(to_string(k))},
                                {"support", support},
                                {"precision", nan_to_null(r.confusion.precision(c))},
                                {"recall", nan_to_null(r.confusion.recall(c))}});
    }
    write_text(dir / "metrics.json", j.dump(2) + "\n");

    std::ostringstream cm;
    cm << "true\\predicted";
    for (ActivityKind k : kAllActivities)
        cm << ',' << to_string(k);
    cm << '\n';
    for (ActivityKind k : kAllActivities)
    {
        cm << to_string(k);
        for (std::size_t p = 0; p < r.confusion.classes; ++p)
            cm << ',' << r.confusion.at(class_index(k), p);
        cm << '\n';
    }
    write_text(dir / "confusion.csv", cm.str());

    std::ostringstream loss;
    loss << "epoch,loss\n";
    for (std::size_t e = 0; e < r.loss_history.size(); ++e)
        loss << e + 1 << ',' << format_double(r.loss_history[e]) << '\n';
    write_text(dir / "loss.csv", loss.str());

    std::ofstream os(dir / "model.ckpt", std::ios::binary | std::ios::trunc);
    if (!os)
        throw DataError("cannot open model.ckpt for writing");
    save_model(os, r.model, m.train);
}

// ------------------------------------------------------- sweep / control

std::vector<SweepRow> sweep_antennas(const ExperimentManifest &m,
                                     const std::function<FeatureTable(std::size_t)> &features_for)
{
    std::vector<SweepRow> rows;
    for (std::size_t M : m.antenna_sweep)
    {
        const FeatureTable t = features_for(M);
        rows.push_back({M, t.rows.size(), train_eval(t, m).accuracy});
    }
    return rows;
}

void write_sweep(const fs::path &dir, const std::vector<SweepRow> &rows)
{
    ensure_dir(dir);
    std::ostringstream csv;
    csv << "antennas,windows,accuracy\n";
    for (const SweepRow &r : rows)
        csv << r.antennas << ',' << r.windows << ',' << format_double(r.accuracy) << '\n';
    write_text(dir / "sweep.csv", csv.str());
}

std::vector<ControlRow> control(const FeatureTable &t, const ExperimentManifest &m)
{
    std::vector<ControlRow> out;
    for (ActivityKind k : kAllActivities)
    {
        std::vector<ControlWindow> w;
        for (const FeatureRow &r : t.rows)
            if (r.label == k)
            {
                FeatureSet fs;
                fs.lambdas = r.lambdas;
                w.push_back({assemble_input(fs, m.drop_largest), r.start, r.length, r.record_snapshots});
            }
        if (w.empty())
            continue;
        ControlRow row;
        row.activity = k;
        row.result = early_late_control(w, m.train);
        row.pass = row.result.accuracy >= 0.35 && row.result.accuracy <= 0.65;
        out.push_back(std::move(row));
    }
    return out;
}

void write_control(const fs::path &dir, const std::vector<ControlRow> &rows)
{
    ensure_dir(dir);
    std::ostringstream csv;
    csv << "activity,windows_used,windows_dropped,accuracy,pass\n";
    bool all = true;
    ojson j;
    j["rows"] = ojson::array();
    for (const ControlRow &r : rows)
    {
        csv << to_string(r.activity) << ',' << r.result.windows_used << ',' << r.result.windows_dropped << ','
            << format_double(r.result.accuracy) << ',' << (r.pass ? "pass" : "fail") << '\n';
        all = all && r.pass;
        j["rows"].push_back({{"activity", std::string(to_string(r.activity))},
                             {"accuracy", r.result.accuracy},
                             {"pass", r.pass}});
    }
    j["band"] = {0.35, 0.65};
    j["verdict"] = all ? "pass" : "fail";
    write_text(dir / "control.csv", csv.str());
    write_text(dir / "control.json", j.dump(2) + "\n");
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace mmsense
