// Command-line front end: dataset featurization, KGEM training and grid
// search, rank-based evaluation, TWIG-I training/finetuning/ablation, the
// TWIG simulator, and results reporting.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "kglp/checkpoint.hpp"
#include "kglp/json_io.hpp"
#include "kglp/synthetic.hpp"
#include "kglp/twig.hpp"
#include "kglp/twigi.hpp"

namespace fs = std::filesystem;
using namespace kglp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir;

    [[nodiscard]] fs::path out() const { return out_dir; }
};

std::string default_out_root() {
    if (const char* env = std::getenv("KGLP_OUT")) return env;
    return "out";
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// one line per metric, append-only
void append_results_row(const GlobalOpts& g, const std::string& dataset,
                        const std::string& hash_hex, const std::string& metric, double value) {
    fs::create_directories(g.out());
    const fs::path path = g.out() / "results.csv";
    const bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw RuntimeFault("cannot append to " + path.string());
    if (fresh) out << "timestamp,git,config_hash,seed,dataset,metric,value\n";
    out << timestamp_utc() << ',' << KGLP_GIT_DESCRIBE << ',' << hash_hex << ',' << g.seed << ','
        << dataset << ',' << metric << ',' << std::setprecision(17) << value << '\n';
}

KnowledgeGraph load_dataset(const std::string& dir) {
    const fs::path p(dir);
    return load_kg((p / "train.txt").string(), (p / "valid.txt").string(),
                   (p / "test.txt").string());
}

std::string dataset_name(const std::string& dir) {
    auto p = fs::path(dir);
    if (p.filename().string().empty()) p = p.parent_path();
    return p.filename().string();
}

void warn_duplicates(const KnowledgeGraph& kg) {
    if (kg.load_report.total_duplicates() > 0) {
        std::cerr << "warning: dropped " << kg.load_report.total_duplicates()
                  << " duplicate triples (train " << kg.load_report.duplicates_train << ", valid "
                  << kg.load_report.duplicates_valid << ", test " << kg.load_report.duplicates_test
                  << ")\n";
    }
}

// ---------------------------------------------------------------- features

int cmd_features(const GlobalOpts& g, const std::string& data_dir, const std::string& split,
                 const std::string& out_csv) {
    auto kg = load_dataset(data_dir);
    warn_duplicates(kg);
    auto index = build_index(kg);

    fs::path out_path = out_csv.empty() ? g.out() / (dataset_name(data_dir) + "_features.csv")
                                        : fs::path(out_csv);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    std::ofstream out(out_path);
    if (!out) throw RuntimeFault("cannot write " + out_path.string());

    json cfg{{"command", "features"}, {"data", data_dir}, {"split", split}};
    out << "# seed=" << g.seed << " config=" << config_hash_hex(cfg) << '\n';
    out << "subject,predicate,object,split";
    for (const auto& name : feature_names()) out << ',' << name;
    out << '\n';
    out << std::setprecision(17);

    auto emit = [&](const std::vector<Triple>& triples, const char* name) {
        for (const auto& t : triples) {
            auto v = featurize(index, t);
            out << '"' << kg.entities.label_of(t.subject) << "\",\""
                << kg.predicates.label_of(t.predicate) << "\",\""
                << kg.entities.label_of(t.object) << "\"," << name;
            for (int i = 0; i < kNumFeatures; ++i) out << ',' << v[i];
            out << '\n';
        }
    };
    if (split == "train" || split == "all") emit(kg.train, "train");
    if (split == "valid" || split == "all") emit(kg.valid, "valid");
    if (split == "test" || split == "all") emit(kg.test, "test");

    std::cout << "wrote " << out_path.string() << '\n';
    return kExitOk;
}

// ------------------------------------------------------------- train-kgem

KgemConfig config_from_cli(const std::string& config_file, const json& overrides,
                           std::uint64_t seed) {
    json merged;
    if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw ValidationError("cannot open config file: " + config_file);
        merged = json::parse(in, nullptr, true, true);
    }
    for (const auto& [k, v] : overrides.items()) merged[k] = v; // command line wins
    if (!merged.contains("seed")) merged["seed"] = seed;
    return kgem_config_from_json(merged);
}

int cmd_train_kgem(const GlobalOpts& g, const std::string& data_dir,
                   const std::string& config_file, const json& overrides,
                   const std::string& checkpoint_path, const std::string& metrics_csv,
                   int eval_every, const std::string& tie_policy) {
    auto kg = load_dataset(data_dir);
    warn_duplicates(kg);
    auto index = build_index(kg);
    auto config = config_from_cli(config_file, overrides, g.seed);
    const auto cfg_json = kgem_config_to_json(config);
    const auto hash_hex = config_hash_hex(cfg_json);
    const auto policy = tie_policy_from_string(tie_policy);
    const auto name = dataset_name(data_dir);

    fs::create_directories(g.out());
    fs::path metrics_path =
        metrics_csv.empty() ? g.out() / (name + "_" + hash_hex + "_metrics.csv")
                            : fs::path(metrics_csv);
    if (metrics_path.has_parent_path()) fs::create_directories(metrics_path.parent_path());
    std::ofstream metrics(metrics_path);
    if (!metrics) throw RuntimeFault("cannot write " + metrics_path.string());
    metrics << "# seed=" << config.seed << " config=" << hash_hex << '\n';
    metrics << "epoch,loss,valid_mrr\n" << std::setprecision(17);

    const auto filter = kg.all_true_triples();
    auto result = train_kgem(kg, index, config, [&](int epoch, double loss, const KgemModel& m) {
        std::cout << "epoch " << epoch << " loss " << loss;
        metrics << epoch << ',' << loss << ',';
        if (eval_every > 0 && (epoch + 1) % eval_every == 0 && !kg.valid.empty()) {
            auto report = evaluate(kgem_scorer(m), kg.valid, filter, policy, kg.entities.size());
            std::cout << " valid MRR " << report.mrr;
            metrics << report.mrr;
        }
        metrics << '\n';
        std::cout << '\n';
    });

    if (!kg.valid.empty()) {
        auto report = evaluate(kgem_scorer(result.model), kg.valid, filter, policy,
                               kg.entities.size());
        std::cout << "valid MRR " << report.mrr << " MR " << report.mr << " H@10 " << report.hits10
                  << '\n';
        append_results_row(g, name, hash_hex, "valid_mrr", report.mrr);
    }
    if (result.sampler_fallbacks > 0) {
        std::cerr << "note: pseudo-typed sampler fell back to basic " << result.sampler_fallbacks
                  << " times\n";
    }

    fs::path ckpt = checkpoint_path.empty() ? g.out() / (name + "_" + hash_hex + ".kgem")
                                            : fs::path(checkpoint_path);
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    save_kgem_checkpoint(ckpt.string(), result.model, config_hash(cfg_json));
    append_results_row(g, name, hash_hex, "final_train_loss", result.epoch_loss.back());
    std::cout << "checkpoint " << ckpt.string() << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------- grid

int cmd_grid(const GlobalOpts& g, const std::string& data_dir, const std::string& grid_file,
             const std::string& out_dir, const std::string& kg_name_flag) {
    auto kg = load_dataset(data_dir);
    warn_duplicates(kg);
    if (kg.valid.empty()) throw ValidationError("grid requires a non-empty valid split");
    auto index = build_index(kg);

    GridSpec spec;
    if (!grid_file.empty()) {
        std::ifstream in(grid_file);
        if (!in) throw ValidationError("cannot open grid spec: " + grid_file);
        spec = grid_spec_from_json(json::parse(in, nullptr, true, true));
    }
    auto combos = spec.cartesian();
    const std::string kg_name = kg_name_flag.empty() ? dataset_name(data_dir) : kg_name_flag;

    fs::path records_dir = out_dir.empty() ? g.out() / (kg_name + "_records") : fs::path(out_dir);
    fs::create_directories(records_dir);
    const fs::path records_path = records_dir / (kg_name + ".jsonl");
    std::ofstream out(records_path);
    if (!out) throw RuntimeFault("cannot write " + records_path.string());

    std::cout << combos.size() << " combos on " << kg_name << " with " << g.threads
              << " thread(s)\n";

    std::mutex io_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::exception_ptr first_error;
    auto worker = [&]() {
        try {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= combos.size()) return;
                KgemConfig config = combos[i];
                // per-combo stream derived from (global seed, combo index)
                config.seed = RngStream::derive_seed(g.seed, "grid/combo-" + std::to_string(i));
                auto record = build_record(kg_name, kg, index, config);
                const std::string line = record_to_json(record).dump();
                {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    out << line << '\n';
                    out.flush();
                    std::cout << "[" << ++done << "/" << combos.size() << "] " << config.describe()
                              << " -> valid MRR " << record.mrr << '\n';
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(io_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(combos.size()); // stop remaining workers
        }
    };

    std::vector<std::thread> pool;
    const int n_threads = std::max(1, g.threads);
    for (int i = 0; i < n_threads - 1; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    std::cout << "records " << records_path.string() << '\n';
    return kExitOk;
}

// --------------------------------------------------------------- evaluate

bool is_twigi_checkpoint(const std::string& path) {
    try {
        load_twigi_checkpoint(path);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

int cmd_evaluate(const GlobalOpts& g, const std::string& data_dir, const std::string& checkpoint,
                 const std::string& split, const std::string& tie_policy, bool unfiltered) {
    auto kg = load_dataset(data_dir);
    warn_duplicates(kg);
    auto index = build_index(kg);
    const auto policy = tie_policy_from_string(tie_policy);
    const auto& triples = split == "valid" ? kg.valid : kg.test;
    if (triples.empty()) throw ValidationError("split '" + split + "' is empty");
    const TripleSet filter = unfiltered ? TripleSet{} : kg.all_true_triples();

    Scorer scorer;
    KgemModel kgem_model;
    TwigIModel twigi_model;
    std::uint64_t hash = 0;
    std::string family;
    if (is_twigi_checkpoint(checkpoint)) {
        twigi_model = load_twigi_checkpoint(checkpoint, &hash);
        scorer = twigi_scorer(twigi_model, index);
        family = "twigi";
    } else {
        kgem_model = load_kgem_checkpoint(checkpoint, &hash);
        if (kgem_model.n_entities != kg.entities.size() ||
            kgem_model.n_predicates != kg.predicates.size()) {
            throw ValidationError("checkpoint vocabulary does not match this dataset");
        }
        scorer = kgem_scorer(kgem_model);
        family = to_string(kgem_model.config.scoring);
    }

    auto report = evaluate(scorer, triples, filter, policy, kg.entities.size());

    std::cout << std::left << std::setw(12) << "model" << std::setw(10) << "split" << std::setw(12)
              << "queries" << std::setw(10) << "MR" << std::setw(10) << "MRR" << std::setw(8)
              << "H@1" << std::setw(8) << "H@3" << std::setw(8) << "H@5" << std::setw(8) << "H@10"
              << '\n';
    std::cout << std::left << std::setw(12) << family << std::setw(10) << split << std::setw(12)
              << report.query_count() << std::setw(10) << std::setprecision(4) << report.mr
              << std::setw(10) << report.mrr << std::setw(8) << report.hits1 << std::setw(8)
              << report.hits3 << std::setw(8) << report.hits5 << std::setw(8) << report.hits10
              << '\n';

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx", static_cast<unsigned long long>(hash));
    const auto name = dataset_name(data_dir);
    append_results_row(g, name, hash_hex, split + "_mrr", report.mrr);
    append_results_row(g, name, hash_hex, split + "_mr", report.mr);
    append_results_row(g, name, hash_hex, split + "_hits10", report.hits10);
    return kExitOk;
}

// ------------------------------------------------- train-twigi / finetune

json twigi_config_json(const TwigIConfig& c, const std::vector<std::string>& ablated) {
    json j;
    j["npp"] = c.npp;
    j["lr"] = c.lr;
    j["batch_size"] = c.batch_size;
    j["margin"] = c.margin;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["hidden"] = c.hidden;
    j["dropout"] = c.dropout;
    j["ablated"] = ablated;
    return j;
}

int cmd_train_twigi(const GlobalOpts& g, const std::string& data_dir, const TwigIConfig& config_in,
                    const std::vector<std::string>& ablate_names, const std::string& from_ckpt,
                    const std::string& checkpoint_path, const std::string& tie_policy) {
    auto kg = load_dataset(data_dir);
    warn_duplicates(kg);
    auto index = build_index(kg);
    TwigIConfig config = config_in;
    config.seed = g.seed;

    AblationMask ablation(ablate_names);
    const auto name = dataset_name(data_dir);

    TwigITrainResult result;
    if (from_ckpt.empty()) {
        result = train_twigi(kg, index, config, ablation, [](int epoch, double loss) {
            std::cout << "epoch " << epoch << " loss " << loss << '\n';
        });
    } else {
        auto model = load_twigi_checkpoint(from_ckpt);
        ablation = model.ablation; // the mask travels with the checkpoint
        result = finetune_twigi(std::move(model), kg, index, config,
                                [](int epoch, double loss) {
                                    std::cout << "epoch " << epoch << " loss " << loss << '\n';
                                });
    }
    const auto cfg_json = twigi_config_json(config, ablation.excluded_names());
    const auto hash_hex = config_hash_hex(cfg_json);

    const auto policy = tie_policy_from_string(tie_policy);
    if (!kg.valid.empty()) {
        auto report = evaluate(twigi_scorer(result.model, index), kg.valid, kg.all_true_triples(),
                               policy, kg.entities.size());
        std::cout << "valid MRR " << report.mrr << " H@10 " << report.hits10 << '\n';
        append_results_row(g, name, hash_hex, "valid_mrr", report.mrr);
    }

    fs::create_directories(g.out());
    fs::path ckpt = checkpoint_path.empty() ? g.out() / (name + "_" + hash_hex + ".twigi")
                                            : fs::path(checkpoint_path);
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    save_twigi_checkpoint(ckpt.string(), result.model, config_hash(cfg_json));
    std::cout << "checkpoint " << ckpt.string() << '\n';
    return kExitOk;
}

int cmd_ablate(const GlobalOpts& g, const std::string& data_dir, const TwigIConfig& config_in,
               const std::vector<std::string>& ablate_names, const std::string& tie_policy) {
    if (ablate_names.empty()) throw ValidationError("ablate requires --features");
    auto kg = load_dataset(data_dir);
    warn_duplicates(kg);
    auto index = build_index(kg);
    TwigIConfig config = config_in;
    config.seed = g.seed;
    const auto policy = tie_policy_from_string(tie_policy);
    const auto& eval_split = kg.test.empty() ? kg.valid : kg.test;
    if (eval_split.empty()) throw ValidationError("ablate needs a valid or test split");
    const auto filter = kg.all_true_triples();
    const auto name = dataset_name(data_dir);

    auto run = [&](const AblationMask& mask_arg, const std::string& label) {
        auto result = train_twigi(kg, index, config, mask_arg);
        auto report = evaluate(twigi_scorer(result.model, index), eval_split, filter, policy,
                               kg.entities.size());
        std::cout << std::left << std::setw(36) << label << " MRR " << std::setprecision(6)
                  << report.mrr << "  H@10 " << report.hits10 << '\n';
        return report.mrr;
    };

    const double full = run(AblationMask(), "all 22 features");
    std::string joined;
    for (const auto& n : ablate_names) joined += (joined.empty() ? "" : "+") + n;
    const double reduced = run(AblationMask(ablate_names), "without " + joined);
    std::cout << "delta MRR (without - with): " << std::setprecision(6) << reduced - full << '\n';

    const auto cfg_json = twigi_config_json(config, ablate_names);
    append_results_row(g, name, config_hash_hex(cfg_json), "ablated_mrr", reduced);
    append_results_row(g, name, config_hash_hex(cfg_json), "full_mrr", full);
    return kExitOk;
}

// ----------------------------------------------------------------- simulate

int cmd_simulate(const GlobalOpts& g, const std::string& records_path, const std::string& mode_str,
                 double pct, const std::string& holdout_kg, const std::string& out_prefix) {
    std::vector<ExperimentRecord> records;
    if (fs::is_directory(records_path)) {
        records = read_records_dir(records_path);
    } else {
        records = read_records(records_path);
    }
    if (records.empty()) throw ValidationError("no records loaded");

    ProtocolMode mode;
    if (mode_str == "holdout") {
        mode = ProtocolMode::HoldoutPct;
    } else if (mode_str == "zero-shot") {
        mode = ProtocolMode::ZeroShot;
    } else if (mode_str == "few-shot") {
        mode = ProtocolMode::FewShot;
    } else {
        throw ValidationError("unknown protocol mode: " + mode_str);
    }

    auto split = split_protocols(records, mode, pct, holdout_kg, g.seed);
    if (split.train_indices.empty() || split.test_indices.empty()) {
        throw ValidationError("protocol split left train or test empty");
    }
    std::cout << "train records " << split.train_indices.size() << ", test records "
              << split.test_indices.size() << '\n';

    std::vector<ExperimentRecord> train_records;
    for (auto i : split.train_indices) train_records.push_back(records[i]);

    TwigConfig config;
    config.seed = g.seed;
    auto trained = train_twig(train_records, config);

    fs::create_directories(g.out());
    const std::string prefix = out_prefix.empty() ? "twig" : out_prefix;
    const json protocol_cfg{{"command", "simulate"}, {"mode", mode_str}, {"pct", pct},
                            {"holdout_kg", holdout_kg}};
    const std::string protocol_hash = config_hash_hex(protocol_cfg);
    std::ofstream scatter(g.out() / (prefix + "_scatter.csv"));
    scatter << "# seed=" << g.seed << " config=" << protocol_hash << '\n';
    scatter << "kg,config_hash,true_mrr,predicted_mrr\n" << std::setprecision(17);

    struct PerKg {
        std::vector<double> pred, truth;
    };
    std::map<std::string, PerKg> by_kg;
    for (auto i : split.test_indices) {
        const auto& rec = records[i];
        std::vector<double> flat;
        flat.reserve(rec.queries.size() * kNumFeatures);
        for (const auto& q : rec.queries) {
            flat.insert(flat.end(), q.features.values.begin(), q.features.values.end());
        }
        const double pred = predict_mrr(trained.model, flat,
                                        static_cast<int>(rec.queries.size()), rec.config,
                                        rec.rank_max);
        by_kg[rec.kg_name].pred.push_back(pred);
        by_kg[rec.kg_name].truth.push_back(rec.mrr);
        scatter << rec.kg_name << ',' << config_hash_hex(kgem_config_to_json(rec.config)) << ','
                << rec.mrr << ',' << pred << '\n';
    }

    std::ofstream r2csv(g.out() / (prefix + "_r2.csv"));
    r2csv << "# seed=" << g.seed << " config=" << protocol_hash << '\n';
    r2csv << "kg,n_test,r2\n" << std::setprecision(10);
    std::cout << std::left << std::setw(16) << "kg" << std::setw(10) << "n_test" << "R2\n";
    for (auto& [kg_name, data] : by_kg) {
        if (data.pred.size() < 2) {
            std::cerr << "warning: " << kg_name << " has " << data.pred.size()
                      << " test record(s); R2 needs at least 2, skipping\n";
            continue;
        }
        const double score = r2(data.pred, data.truth);
        std::cout << std::left << std::setw(16) << kg_name << std::setw(10) << data.pred.size()
                  << std::setprecision(6) << score << '\n';
        r2csv << kg_name << ',' << data.pred.size() << ',' << score << '\n';
        append_results_row(g, kg_name, "-", "twig_r2_" + mode_str, score);
    }
    std::cout << "wrote " << (g.out() / (prefix + "_scatter.csv")).string() << " and "
              << (g.out() / (prefix + "_r2.csv")).string() << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------- report

int cmd_report(const GlobalOpts& g, const std::string& results_dir) {
    const fs::path dir = results_dir.empty() ? g.out() : fs::path(results_dir);
    const fs::path path = dir / "results.csv";
    std::ifstream in(path);
    if (!in) throw ValidationError("no results.csv under " + dir.string());

    struct Row {
        std::string dataset, hash, metric;
        double value;
    };
    std::vector<Row> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            auto pos = line.find(',', start);
            cols.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (cols.size() != 7) continue;
        rows.push_back({cols[4], cols[2], cols[5], std::stod(cols[6])});
    }
    if (rows.empty()) throw ValidationError("results.csv has no data rows");

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.dataset, a.hash, a.metric) < std::tie(b.dataset, b.hash, b.metric);
    });

    std::cout << std::left << std::setw(20) << "dataset" << std::setw(18) << "config" << std::setw(20)
              << "metric" << "value\n";
    std::ofstream summary(dir / "summary.csv");
    summary << "dataset,config_hash,metric,value\n" << std::setprecision(17);
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(20) << r.dataset << std::setw(18) << r.hash
                  << std::setw(20) << r.metric << std::setprecision(6) << r.value << '\n';
        summary << r.dataset << ',' << r.hash << ',' << r.metric << ',' << r.value << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph link prediction toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    g.out_dir = default_out_root();
    app.add_option("--seed", g.seed, "global random seed");
    app.add_option("--threads", g.threads, "worker threads for grid runs");
    app.add_option("--out", g.out_dir, "output root directory");

    // features
    auto* sc_features = app.add_subcommand("features", "export structural feature CSV");
    std::string f_data, f_split = "all", f_out;
    sc_features->add_option("--data", f_data, "dataset directory")->required();
    sc_features->add_option("--split", f_split, "train|valid|test|all")
        ->check(CLI::IsMember({"train", "valid", "test", "all"}));
    sc_features->add_option("-o,--output", f_out, "output CSV path");

    // train-kgem
    auto* sc_train = app.add_subcommand("train-kgem", "train one embedding model");
    std::string t_data, t_config, t_ckpt, t_metrics, t_tie = "realistic";
    int t_eval_every = 0;
    json t_overrides;
    std::string t_scoring, t_loss, t_sampler;
    double t_margin = -1, t_lr = -1, t_reg = -1;
    int t_dim = -1, t_npp = -1, t_batch = -1, t_epochs = -1, t_norm = -1;
    sc_train->add_option("--data", t_data, "dataset directory")->required();
    sc_train->add_option("--config", t_config, "JSON config file");
    sc_train->add_option("--scoring", t_scoring, "TransE|DistMult|ComplEx");
    sc_train->add_option("--loss", t_loss, "MRL|BCEL|CEL");
    sc_train->add_option("--sampler", t_sampler, "basic|bernoulli|pseudo");
    sc_train->add_option("--dim", t_dim, "embedding dimension");
    sc_train->add_option("--margin", t_margin, "MRL margin");
    sc_train->add_option("--npp", t_npp, "negatives per positive");
    sc_train->add_option("--lr", t_lr, "learning rate");
    sc_train->add_option("--reg", t_reg, "L3 regularizer coefficient");
    sc_train->add_option("--transe-norm", t_norm, "TransE p-norm (1 or 2)");
    sc_train->add_option("--batch", t_batch, "batch size");
    sc_train->add_option("--epochs", t_epochs, "training epochs");
    sc_train->add_option("--checkpoint", t_ckpt, "checkpoint output path");
    sc_train->add_option("--metrics", t_metrics, "metrics CSV path");
    sc_train->add_option("--eval-every", t_eval_every, "evaluate on valid every k epochs");
    sc_train->add_option("--tie-policy", t_tie, "optimistic|realistic|pessimistic");

    // grid
    auto* sc_grid = app.add_subcommand("grid", "run a hyperparameter grid, one record per combo");
    std::string gr_data, gr_spec, gr_out, gr_name;
    sc_grid->add_option("--data", gr_data, "dataset directory")->required();
    sc_grid->add_option("--grid-spec", gr_spec, "JSON grid specification");
    sc_grid->add_option("--out-dir", gr_out, "records output directory");
    sc_grid->add_option("--kg-name", gr_name, "KG name stored in records");

    // evaluate
    auto* sc_eval = app.add_subcommand("evaluate", "rank-based evaluation of a checkpoint");
    std::string e_data, e_ckpt, e_split = "test", e_tie = "realistic";
    bool e_unfiltered = false;
    sc_eval->add_option("--data", e_data, "dataset directory")->required();
    sc_eval->add_option("--checkpoint", e_ckpt, "model checkpoint")->required();
    sc_eval->add_option("--split", e_split, "test|valid")
        ->check(CLI::IsMember({"test", "valid"}));
    sc_eval->add_option("--tie-policy", e_tie, "optimistic|realistic|pessimistic");
    sc_eval->add_flag("--unfiltered", e_unfiltered, "skip the filtering step");

    // train-twigi / finetune / ablate
    TwigIConfig twigi_cfg;
    std::string w_data, w_ckpt, w_from, w_tie = "realistic";
    std::vector<std::string> w_ablate;
    auto add_twigi_opts = [&](CLI::App* sc) {
        sc->add_option("--data", w_data, "dataset directory")->required();
        sc->add_option("--npp", twigi_cfg.npp, "negatives per positive");
        sc->add_option("--lr", twigi_cfg.lr, "learning rate");
        sc->add_option("--batch", twigi_cfg.batch_size, "batch size");
        sc->add_option("--margin", twigi_cfg.margin, "margin ranking loss margin");
        sc->add_option("--epochs", twigi_cfg.epochs, "training epochs");
        sc->add_option("--hidden", twigi_cfg.hidden, "hidden layer widths")->delimiter(',');
        sc->add_option("--dropout", twigi_cfg.dropout, "dropout between dense layers");
        sc->add_option("--tie-policy", w_tie, "optimistic|realistic|pessimistic");
    };
    auto* sc_twigi = app.add_subcommand("train-twigi", "train the structural link predictor");
    add_twigi_opts(sc_twigi);
    sc_twigi->add_option("--ablate", w_ablate, "feature names to exclude")->delimiter(',');
    sc_twigi->add_option("--checkpoint", w_ckpt, "checkpoint output path");

    auto* sc_finetune = app.add_subcommand("finetune", "finetune a pretrained model on a new KG");
    add_twigi_opts(sc_finetune);
    sc_finetune->add_option("--from", w_from, "pretrained checkpoint")->required();
    sc_finetune->add_option("--checkpoint", w_ckpt, "checkpoint output path");

    auto* sc_ablate = app.add_subcommand("ablate", "compare with/without selected features");
    add_twigi_opts(sc_ablate);
    sc_ablate->add_option("--features", w_ablate, "feature names to remove")
        ->required()
        ->delimiter(',');

    // simulate
    auto* sc_sim = app.add_subcommand("simulate", "train the simulator on grid records");
    std::string s_records, s_mode = "holdout", s_kg, s_prefix;
    double s_pct = 10.0;
    sc_sim->add_option("--records", s_records, "records file or directory")->required();
    sc_sim->add_option("--mode", s_mode, "holdout|zero-shot|few-shot");
    sc_sim->add_option("--pct", s_pct, "holdout or few-shot percentage");
    sc_sim->add_option("--holdout-kg", s_kg, "KG name for zero-/few-shot");
    sc_sim->add_option("--out-prefix", s_prefix, "output file prefix");

    // report
    auto* sc_report = app.add_subcommand("report", "aggregate results rows");
    std::string r_dir;
    sc_report->add_option("--results", r_dir, "results directory (default --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help/usage text
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sc_features->parsed()) return cmd_features(g, f_data, f_split, f_out);
        if (sc_train->parsed()) {
            if (!t_scoring.empty()) t_overrides["scoring"] = t_scoring;
            if (!t_loss.empty()) t_overrides["loss"] = t_loss;
            if (!t_sampler.empty()) t_overrides["sampler"] = t_sampler;
            if (t_dim >= 0) t_overrides["dim"] = t_dim;
            if (t_margin >= 0) t_overrides["margin"] = t_margin;
            if (t_npp >= 0) t_overrides["npp"] = t_npp;
            if (t_lr >= 0) t_overrides["lr"] = t_lr;
            if (t_reg >= 0) t_overrides["reg_coef"] = t_reg;
            if (t_norm >= 0) t_overrides["transe_norm"] = t_norm;
            if (t_batch >= 0) t_overrides["batch_size"] = t_batch;
            if (t_epochs >= 0) t_overrides["epochs"] = t_epochs;
            return cmd_train_kgem(g, t_data, t_config, t_overrides, t_ckpt, t_metrics,
                                  t_eval_every, t_tie);
        }
        if (sc_grid->parsed()) return cmd_grid(g, gr_data, gr_spec, gr_out, gr_name);
        if (sc_eval->parsed()) {
            return cmd_evaluate(g, e_data, e_ckpt, e_split, e_tie, e_unfiltered);
        }
        if (sc_twigi->parsed()) {
            return cmd_train_twigi(g, w_data, twigi_cfg, w_ablate, "", w_ckpt, w_tie);
        }
        if (sc_finetune->parsed()) {
            return cmd_train_twigi(g, w_data, twigi_cfg, {}, w_from, w_ckpt, w_tie);
        }
        if (sc_ablate->parsed()) return cmd_ablate(g, w_data, twigi_cfg, w_ablate, w_tie);
        if (sc_sim->parsed()) return cmd_simulate(g, s_records, s_mode, s_pct, s_kg, s_prefix);
        if (sc_report->parsed()) return cmd_report(g, r_dir);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
