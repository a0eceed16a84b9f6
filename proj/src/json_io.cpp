#include "kglp/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace kglp {

json kgem_config_to_json(const KgemConfig& c) {
    json j;
    j["scoring"] = to_string(c.scoring);
    j["dim"] = c.dim;
    j["loss"] = to_string(c.loss);
    if (c.margin) j["margin"] = *c.margin;
    j["sampler"] = to_string(c.sampler);
    j["npp"] = c.npp;
    j["lr"] = c.lr;
    j["reg_coef"] = c.reg_coef;
    j["transe_norm"] = c.transe_norm;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    return j;
}

KgemConfig kgem_config_from_json(const json& j) {
    KgemConfig c;
    if (j.contains("scoring")) c.scoring = scoring_kind_from_string(j.at("scoring"));
    if (j.contains("dim")) c.dim = j.at("dim");
    if (j.contains("loss")) c.loss = loss_kind_from_string(j.at("loss"));
    if (j.contains("margin") && !j.at("margin").is_null()) c.margin = j.at("margin").get<double>();
    if (j.contains("sampler")) c.sampler = sampler_kind_from_string(j.at("sampler"));
    if (j.contains("npp")) c.npp = j.at("npp");
    if (j.contains("lr")) c.lr = j.at("lr");
    if (j.contains("reg_coef")) c.reg_coef = j.at("reg_coef");
    if (j.contains("transe_norm")) c.transe_norm = j.at("transe_norm");
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size");
    if (j.contains("epochs")) c.epochs = j.at("epochs");
    if (j.contains("seed")) c.seed = j.at("seed");
    c.validate();
    return c;
}

std::uint64_t config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : dump) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_hash_hex(const json& j) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(j)));
    return buf;
}

json grid_spec_to_json(const GridSpec& g) {
    json j;
    auto names = [](const auto& xs, auto f) {
        json arr = json::array();
        for (const auto& x : xs) arr.push_back(f(x));
        return arr;
    };
    j["scoring"] = names(g.scorings, [](ScoringKind k) { return to_string(k); });
    j["loss"] = names(g.losses, [](LossKind k) { return to_string(k); });
    j["margin"] = g.margins;
    j["sampler"] = names(g.samplers, [](SamplerKind k) { return to_string(k); });
    j["npp"] = g.npps;
    j["lr"] = g.lrs;
    j["reg_coef"] = g.reg_coefs;
    j["dim"] = g.dims;
    j["epochs"] = g.epochs;
    j["batch_size"] = g.batch_size;
    return j;
}

GridSpec grid_spec_from_json(const json& j) {
    GridSpec g;
    if (j.contains("scoring")) {
        g.scorings.clear();
        for (const auto& s : j.at("scoring")) g.scorings.push_back(scoring_kind_from_string(s));
    }
    if (j.contains("loss")) {
        g.losses.clear();
        for (const auto& s : j.at("loss")) g.losses.push_back(loss_kind_from_string(s));
    }
    if (j.contains("margin")) g.margins = j.at("margin").get<std::vector<double>>();
    if (j.contains("sampler")) {
        g.samplers.clear();
        for (const auto& s : j.at("sampler")) g.samplers.push_back(sampler_kind_from_string(s));
    }
    if (j.contains("npp")) g.npps = j.at("npp").get<std::vector<int>>();
    if (j.contains("lr")) g.lrs = j.at("lr").get<std::vector<double>>();
    if (j.contains("reg_coef")) g.reg_coefs = j.at("reg_coef").get<std::vector<double>>();
    if (j.contains("dim")) g.dims = j.at("dim").get<std::vector<int>>();
    if (j.contains("epochs")) g.epochs = j.at("epochs");
    if (j.contains("batch_size")) g.batch_size = j.at("batch_size");
    return g;
}

json record_to_json(const ExperimentRecord& rec) {
    json j;
    j["schema_version"] = kRecordSchemaVersion;
    j["kg"] = rec.kg_name;
    j["config"] = kgem_config_to_json(rec.config);
    j["config_hash"] = config_hash_hex(kgem_config_to_json(rec.config));
    j["seed"] = rec.seed;
    j["rank_max"] = rec.rank_max;
    j["mrr"] = rec.mrr;
    json qs = json::array();
    for (const auto& q : rec.queries) {
        json e;
        e["f"] = q.features.values;
        e["side"] = to_string(q.side);
        e["rank"] = q.rank;
        qs.push_back(std::move(e));
    }
    j["queries"] = std::move(qs);
    return j;
}

ExperimentRecord record_from_json(const json& j) {
    const int version = j.value("schema_version", 0);
    if (version != kRecordSchemaVersion) {
        throw ParseError("unsupported record schema version " + std::to_string(version));
    }
    ExperimentRecord rec;
    rec.kg_name = j.at("kg");
    rec.config = kgem_config_from_json(j.at("config"));
    rec.seed = j.at("seed");
    rec.rank_max = j.at("rank_max");
    rec.mrr = j.at("mrr");
    for (const auto& e : j.at("queries")) {
        ExperimentRecord::QueryEntry q;
        const auto& f = e.at("f");
        if (f.size() != static_cast<std::size_t>(kNumFeatures)) {
            throw ParseError("record query has wrong feature count");
        }
        for (int i = 0; i < kNumFeatures; ++i) q.features[i] = f[i];
        q.side = e.at("side") == "subject" ? QuerySide::Subject : QuerySide::Object;
        q.rank = e.at("rank");
        rec.queries.push_back(std::move(q));
    }
    rec.validate();
    return rec;
}

void write_records(const std::string& path, std::span<const ExperimentRecord> records) {
    std::ofstream out(path);
    if (!out) throw RuntimeFault("cannot write records file: " + path);
    for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
    if (!out) throw RuntimeFault("failed writing records file: " + path);
}

std::vector<ExperimentRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open records file: " + path);
    std::vector<ExperimentRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ExperimentRecord> read_records_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError("no .jsonl record files in " + dir);
    std::vector<ExperimentRecord> out;
    for (const auto& f : files) {
        auto part = read_records(f);
        out.insert(out.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    return out;
}

} // namespace kglp
