#include <doctest.h>

#include <cmath>

#include "kglp/json_io.hpp"
#include "kglp/synthetic.hpp"
#include "kglp/twig.hpp"
#include "test_support.hpp"

using namespace kglp;

namespace {

// fabricates a consistent record without training anything
ExperimentRecord fake_record(const std::string& kg_name, const KgemConfig& config,
                             double rank_max, const std::vector<double>& ranks,
                             std::uint64_t feature_seed) {
    ExperimentRecord rec;
    rec.kg_name = kg_name;
    rec.config = config;
    rec.seed = config.seed;
    rec.rank_max = rank_max;
    RngStream rng(feature_seed);
    double rsum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        ExperimentRecord::QueryEntry q;
        for (int j = 0; j < kNumFeatures; ++j) q.features[j] = rng.next_uniform(0, 12);
        q.side = (i % 2 == 0) ? QuerySide::Object : QuerySide::Subject;
        q.rank = ranks[i];
        rsum += 1.0 / q.rank;
        rec.queries.push_back(q);
    }
    rec.mrr = rsum / static_cast<double>(ranks.size());
    return rec;
}

KgemConfig combo(double lr, int npp, int dim, std::uint64_t seed = 0) {
    KgemConfig c;
    c.loss = LossKind::BCEL;
    c.sampler = SamplerKind::Basic;
    c.lr = lr;
    c.npp = npp;
    c.dim = dim;
    c.seed = seed;
    return c;
}

TwigConfig micro_twig(std::uint64_t seed) {
    TwigConfig cfg;
    cfg.struct_hidden = {5, 4};
    cfg.hyp_hidden = {5, 4};
    cfg.trunk_hidden = 3;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("rank histogram") {
    SUBCASE("all rank-1 mass lands in bin 0") {
        std::vector<double> ranks(17, 1.0);
        auto h = histogram(ranks, 100.0);
        CHECK(h.mass[0] == 1.0);
        for (int i = 1; i < RankHistogram::kBins; ++i) CHECK(h.mass[i] == 0.0);
    }
    SUBCASE("masses always sum to 1") {
        RngStream rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> ranks;
            const double rank_max = 2.0 + static_cast<double>(rng.next_index(500));
            for (int i = 0; i < 200; ++i) ranks.push_back(1.0 + rng.next_real() * (rank_max - 1.0));
            auto h = histogram(ranks, rank_max);
            double total = 0.0;
            for (double m : h.mass) total += m;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("uniform ranks approach uniform masses") {
        RngStream rng(4);
        const double rank_max = 3000.0;
        std::vector<double> ranks;
        for (int i = 0; i < 60000; ++i) {
            ranks.push_back(1.0 + static_cast<double>(rng.next_index(3000)));
        }
        auto h = histogram(ranks, rank_max);
        for (double m : h.mass) CHECK(std::abs(m - 1.0 / 30.0) < 0.005);
    }
    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(histogram({}, 10.0), ValidationError);
    }
    SUBCASE("rank_max edge goes to the last bin") {
        std::vector<double> ranks{100.0};
        auto h = histogram(ranks, 100.0);
        CHECK(h.mass[RankHistogram::kBins - 1] == 1.0);
    }
}

TEST_CASE("kl divergence") {
    SUBCASE("identical histograms diverge by 0") {
        RankHistogram h;
        for (int i = 0; i < 5; ++i) h.mass[i] = 0.2;
        CHECK(std::abs(kl_div(h, h)) < 1e-9);
    }
    SUBCASE("two-bin hand computation") {
        RankHistogram p, q;
        p.mass[0] = 1.0;
        q.mass[0] = 0.5;
        q.mass[1] = 0.5;
        CHECK(kl_div(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    }
    SUBCASE("non-negative for random histogram pairs") {
        RngStream rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            RankHistogram p, q;
            double ps = 0, qs = 0;
            for (int i = 0; i < RankHistogram::kBins; ++i) {
                p.mass[i] = rng.next_real();
                q.mass[i] = rng.next_real();
                ps += p.mass[i];
                qs += q.mass[i];
            }
            for (int i = 0; i < RankHistogram::kBins; ++i) {
                p.mass[i] /= ps;
                q.mass[i] /= qs;
            }
            CHECK(kl_div(p, q) >= -1e-12);
        }
    }
}

TEST_CASE("rank transform") {
    CHECK(rank_transform(0.0, 250.0) == 1.0);
    CHECK(rank_transform(1.0, 250.0) == 250.0);
    CHECK(rank_transform(0.5, 100.0) == 50.5);
    double prev = 0.0;
    for (double y = 0.05; y < 1.0; y += 0.05) {
        double r = rank_transform(y, 321.0);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("hyperparameter encoding has exactly one hot bit per group") {
    HyperparamEncodingScheme scheme;
    CHECK(scheme.dim() == 11);
    CHECK(scheme.slot_names().size() == 11);

    auto grid = enumerate_grid();
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        auto enc = scheme.encode(grid[i]);
        REQUIRE(enc.size() == 11);
        CHECK(enc[5] + enc[6] + enc[7] == 1.0);   // loss group
        CHECK(enc[8] + enc[9] + enc[10] == 1.0);  // sampler group
    }

    HyperparamEncodingScheme cross;
    cross.include_scoring = true;
    CHECK(cross.dim() == 14);
    auto enc = cross.encode(combo(1e-2, 5, 50));
    CHECK(enc[11] + enc[12] + enc[13] == 1.0);
}

TEST_CASE("r2 basics") {
    std::vector<double> actual{0.1, 0.4, 0.3, 0.8};
    CHECK(r2(actual, actual) == 1.0);
    std::vector<double> mean_pred(4, 0.4);
    CHECK(r2(mean_pred, actual) == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<double> bad{5.0, -3.0, 7.0, -1.0};
    CHECK(r2(bad, actual) < 0.0);
    std::vector<double> single{1.0};
    CHECK_THROWS_AS(r2(single, single), ValidationError);
    std::vector<double> constant(3, 0.5);
    CHECK_THROWS_AS(r2(constant, constant), ValidationError);
}

TEST_CASE("records validate and round-trip through json") {
    auto rec = fake_record("kgA", combo(1e-2, 5, 50), 40.0, {1, 2, 3, 10, 40}, 71);
    CHECK_NOTHROW(rec.validate());

    auto j = record_to_json(rec);
    auto back = record_from_json(j);
    CHECK(back.kg_name == rec.kg_name);
    CHECK(back.mrr == rec.mrr);
    CHECK(back.rank_max == rec.rank_max);
    REQUIRE(back.queries.size() == rec.queries.size());
    for (std::size_t i = 0; i < rec.queries.size(); ++i) {
        CHECK(back.queries[i].features.values == rec.queries[i].features.values);
        CHECK(back.queries[i].rank == rec.queries[i].rank);
        CHECK(back.queries[i].side == rec.queries[i].side);
    }

    auto broken = rec;
    broken.mrr += 1e-3;
    CHECK_THROWS_AS(broken.validate(), ValidationError);
}

TEST_CASE("records written to disk read back identically") {
    std::vector<ExperimentRecord> recs;
    recs.push_back(fake_record("kgA", combo(1e-2, 5, 50), 40.0, {1, 2, 3}, 72));
    recs.push_back(fake_record("kgB", combo(1e-4, 25, 100), 80.0, {4, 5, 6, 7}, 73));
    auto dir = test::temp_dir("records");
    const auto path = (dir / "r.jsonl").string();
    write_records(path, recs);
    auto back = read_records(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].mrr == recs[0].mrr);
    CHECK(back[1].queries.size() == 4);
}

TEST_CASE("combo keys ignore the seed but track hyperparameters") {
    auto a = fake_record("kgA", combo(1e-2, 5, 50, 1), 40.0, {1, 2}, 74);
    auto b = fake_record("kgB", combo(1e-2, 5, 50, 2), 40.0, {3, 4}, 75);
    CHECK(a.combo_key() == b.combo_key()); // replicates share a key
    auto c = fake_record("kgA", combo(1e-4, 5, 50, 1), 40.0, {1, 2}, 76);
    CHECK(a.combo_key() != c.combo_key());
}

TEST_CASE("protocol splits") {
    // 3 KGs x 20 combos
    std::vector<ExperimentRecord> records;
    std::vector<KgemConfig> combos;
    for (int i = 0; i < 20; ++i) combos.push_back(combo(1e-2 / (i + 1), 5 + i, 50));
    for (const auto& name : {"kgA", "kgB", "kgC"}) {
        for (int i = 0; i < 20; ++i) {
            records.push_back(fake_record(name, combos[i], 50.0, {1.0 + i, 2.0 + i}, 80 + i));
        }
    }

    SUBCASE("holdout keeps combos aligned across KGs") {
        auto split = split_protocols(records, ProtocolMode::HoldoutPct, 10.0, "", 3);
        CHECK(split.test_indices.size() == 6); // floor(0.1*20)=2 combos x 3 KGs
        CHECK(split.train_indices.size() + split.test_indices.size() == records.size());
        std::unordered_set<std::uint64_t> test_keys;
        for (auto i : split.test_indices) test_keys.insert(records[i].combo_key());
        CHECK(test_keys.size() == 2);
        for (auto i : split.train_indices) CHECK(!test_keys.count(records[i].combo_key()));
    }
    SUBCASE("zero-shot removes the held-out KG from training") {
        auto split = split_protocols(records, ProtocolMode::ZeroShot, 0.0, "kgB", 3);
        CHECK(split.test_indices.size() == 20);
        for (auto i : split.train_indices) CHECK(records[i].kg_name != "kgB");
        for (auto i : split.test_indices) CHECK(records[i].kg_name == "kgB");
    }
    SUBCASE("few-shot moves a slice of the held-out KG into training") {
        auto split = split_protocols(records, ProtocolMode::FewShot, 25.0, "kgB", 3);
        CHECK(split.train_indices.size() + split.test_indices.size() == records.size());
        std::size_t held_in_train = 0;
        for (auto i : split.train_indices) held_in_train += records[i].kg_name == "kgB";
        CHECK(held_in_train == 5); // floor(0.25*20)
        // disjoint (kg, combo) pairs
        std::unordered_set<std::uint64_t> train_keys;
        for (auto i : split.train_indices) {
            if (records[i].kg_name == "kgB") train_keys.insert(records[i].combo_key());
        }
        for (auto i : split.test_indices) {
            CHECK(records[i].kg_name == "kgB");
            CHECK(!train_keys.count(records[i].combo_key()));
        }
    }
    SUBCASE("the full grid holds out 121 of 1215 combos at 10%") {
        std::vector<ExperimentRecord> full;
        for (const auto& c : enumerate_grid()) {
            full.push_back(fake_record("kgA", c, 40.0, {1, 2}, 7));
        }
        auto split = split_protocols(full, ProtocolMode::HoldoutPct, 10.0, "", 3);
        std::unordered_set<std::uint64_t> test_keys;
        for (auto i : split.test_indices) test_keys.insert(full[i].combo_key());
        CHECK(test_keys.size() == 121);
    }
    SUBCASE("bad percentages are rejected") {
        CHECK_THROWS_AS(split_protocols(records, ProtocolMode::FewShot, 100.0, "kgB", 3),
                        ValidationError);
        CHECK_THROWS_AS(split_protocols(records, ProtocolMode::FewShot, -1.0, "kgB", 3),
                        ValidationError);
        CHECK_THROWS_AS(split_protocols(records, ProtocolMode::ZeroShot, 0.0, "nope", 3),
                        ValidationError);
    }
}

TEST_CASE("combined twig loss gradient matches finite differences") {
    auto cfg = micro_twig(41);
    auto model = init_twig(cfg);
    // move every parameter (zero biases included) to a generic point so the
    // finite-difference interval stays clear of relu kinks
    RngStream jitter(77);
    for (auto* net : {&model.struct_branch, &model.hyp_branch, &model.trunk}) {
        for (auto& v : net->params()) v += jitter.next_uniform(-0.25, 0.25);
    }
    auto rec = fake_record("kgA", combo(1e-2, 5, 50), 60.0, {2, 11, 29, 47, 55, 8}, 90);

    // give the normalizers real statistics so inputs are well-scaled
    {
        std::vector<std::vector<double>> sc, hc;
        for (const auto& q : rec.queries) {
            sc.emplace_back(q.features.values.begin(), q.features.values.end());
        }
        hc.push_back(model.scheme.encode(rec.config));
        hc.push_back(model.scheme.encode(combo(1e-4, 25, 100)));
        model.struct_norm = FeatureNormalizer::fit(sc);
        model.hyp_norm = FeatureNormalizer::fit(hc);
    }

    std::vector<double> gs, gh, gt;
    twig_loss_and_grad(model, rec, 1.0, 10.0, gs, gh, gt);

    const double h = 1e-5;
    auto fd_check = [&](DenseNet& net, const std::vector<double>& analytic) {
        auto& params = net.params();
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double orig = params[i];
            std::vector<double> s1, h1, t1;
            params[i] = orig + h;
            const double up = twig_loss_and_grad(model, rec, 1.0, 10.0, s1, h1, t1);
            s1.clear(), h1.clear(), t1.clear();
            params[i] = orig - h;
            const double down = twig_loss_and_grad(model, rec, 1.0, 10.0, s1, h1, t1);
            params[i] = orig;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-4});
            CAPTURE(i);
            CHECK(std::abs(fd - analytic[i]) / denom < 1e-4);
        }
    };
    fd_check(model.struct_branch, gs);
    fd_check(model.hyp_branch, gh);
    fd_check(model.trunk, gt);
}

TEST_CASE("phase 2 freezes both branches bit-exactly") {
    std::vector<ExperimentRecord> records;
    for (int i = 0; i < 4; ++i) {
        records.push_back(fake_record("kgA", combo(1e-2 / (i + 1), 5, 50), 50.0,
                                      {1.0 + i, 3.0 + i, 7.0 + 2 * i}, 100 + i));
    }

    auto cfg = micro_twig(43);
    cfg.phase1_epochs = 2;
    cfg.phase2_epochs = 0;
    auto after_phase1 = train_twig(records, cfg);

    cfg.phase2_epochs = 3;
    auto after_phase2 = train_twig(records, cfg);

    CHECK(after_phase2.model.struct_branch.params() == after_phase1.model.struct_branch.params());
    CHECK(after_phase2.model.hyp_branch.params() == after_phase1.model.hyp_branch.params());
    CHECK(after_phase2.model.trunk.params() != after_phase1.model.trunk.params());
}

TEST_CASE("needs at least two combos") {
    std::vector<ExperimentRecord> records;
    records.push_back(fake_record("kgA", combo(1e-2, 5, 50, 1), 50.0, {1, 2}, 110));
    records.push_back(fake_record("kgA", combo(1e-2, 5, 50, 2), 50.0, {2, 3}, 111));
    CHECK_THROWS_AS(train_twig(records, micro_twig(44)), ValidationError);
}

TEST_CASE("predict_mrr stays in range and can overfit a micro problem") {
    std::vector<ExperimentRecord> records;
    // clearly separated target MRRs driven by lr
    records.push_back(fake_record("kgA", combo(1e-2, 5, 50), 50.0,
                                  {2, 2, 3, 2, 2, 3, 2, 4, 2, 2}, 120));
    records.push_back(fake_record("kgA", combo(1e-4, 5, 50), 50.0,
                                  {8, 12, 16, 9, 14, 11, 18, 10, 13, 15}, 121));
    records.push_back(fake_record("kgA", combo(1e-6, 5, 50), 50.0,
                                  {30, 45, 38, 50, 42, 35, 47, 40, 33, 49}, 122));

    TwigConfig cfg; // default widths
    cfg.seed = 45;
    cfg.phase1_epochs = 50;
    cfg.phase2_epochs = 200;
    auto trained = train_twig(records, cfg);

    for (const auto& rec : records) {
        std::vector<double> flat;
        for (const auto& q : rec.queries) {
            flat.insert(flat.end(), q.features.values.begin(), q.features.values.end());
        }
        const double pred = predict_mrr(trained.model, flat, static_cast<int>(rec.queries.size()),
                                        rec.config, rec.rank_max);
        CHECK(pred > 1.0 / rec.rank_max);
        CHECK(pred <= 1.0);
        CHECK(std::abs(pred - rec.mrr) < 0.05);
        // deterministic
        CHECK(pred == predict_mrr(trained.model, flat, static_cast<int>(rec.queries.size()),
                                  rec.config, rec.rank_max));
    }
}

TEST_CASE("build_record joins featurized valid queries with ranks") {
    PlantedKgParams params;
    params.n_entities = 30;
    params.n_hubs = 8;
    params.n_predicates = 2;
    params.pool_size = 3;
    params.n_triples = 150;
    params.seed = 10;
    auto kg = make_planted_kg(params);
    auto idx = build_index(kg);

    auto c = combo(1e-2, 2, 4, 7);
    c.epochs = 2;
    c.batch_size = 32;
    auto rec = build_record("toy", kg, idx, c);
    CHECK(rec.queries.size() == 2 * kg.valid.size());
    CHECK(rec.rank_max == kg.entities.size());
    CHECK_NOTHROW(rec.validate()); // stored mrr matches the stored ranks

    // features belong to the originating valid triples
    auto expect0 = featurize(idx, kg.valid[0]);
    CHECK(rec.queries[0].features.values == expect0.values);
    CHECK(rec.queries[0].side == QuerySide::Object);
    CHECK(rec.queries[1].side == QuerySide::Subject);
}
