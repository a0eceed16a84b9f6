#include <doctest.h>

#include <cmath>

#include "kglp/synthetic.hpp"
#include "kglp/twigi.hpp"
#include "test_support.hpp"

using namespace kglp;

namespace {

TwigIConfig fast_config(int epochs, std::uint64_t seed) {
    TwigIConfig cfg;
    cfg.npp = 5;
    cfg.lr = 5e-3;
    cfg.batch_size = 32;
    cfg.epochs = epochs;
    cfg.seed = seed;
    return cfg;
}

double random_scorer_mrr(const KnowledgeGraph& kg, std::uint64_t seed) {
    // deterministic pseudo-random score per triple
    Scorer scorer = [seed](const Triple& t) {
        RngStream h(seed ^ TripleHash{}(t));
        return h.next_real();
    };
    return evaluate(scorer, kg.valid, kg.all_true_triples(), TiePolicy::Realistic,
                    kg.entities.size())
        .mrr;
}

} // namespace

TEST_CASE("initialization is deterministic and shape-correct") {
    AblationMask none;
    auto a = init_twigi(none, {24, 8}, 0.01, 7);
    auto b = init_twigi(none, {24, 8}, 0.01, 7);
    CHECK(a.net.params() == b.net.params());
    auto c = init_twigi(none, {24, 8}, 0.01, 8);
    CHECK(a.net.params() != c.net.params());
    CHECK(a.input_dim() == 22);
    CHECK(a.feature_names.size() == 22);

    AblationMask so({"so_cofreq"});
    auto reduced = init_twigi(so, {24, 8}, 0.01, 7);
    CHECK(reduced.net.spec().front().in == 21);
    CHECK(reduced.feature_names.size() == 21);

    std::vector<std::string> all(feature_names().begin(), feature_names().end());
    CHECK_THROWS_AS(init_twigi(AblationMask(all), {24, 8}, 0.01, 7), ValidationError);
}

TEST_CASE("forward behaviour") {
    AblationMask none;
    auto model = init_twigi(none, {6, 4}, 0.5, 3);

    std::vector<double> x(22, 0.3);
    SUBCASE("scores stay strictly inside (0,1)") {
        auto y = twigi_forward(model, x, 1, false, nullptr);
        CHECK(y[0] > 0.0);
        CHECK(y[0] < 1.0);
    }
    SUBCASE("inference is deterministic") {
        auto y1 = twigi_forward(model, x, 1, false, nullptr);
        auto y2 = twigi_forward(model, x, 1, false, nullptr);
        CHECK(y1 == y2);
    }
    SUBCASE("dropout changes training-mode outputs") {
        auto rng = RngStream::named(9, "dropout");
        auto y1 = twigi_forward(model, x, 1, true, &rng);
        auto y2 = twigi_forward(model, x, 1, true, &rng);
        CHECK(y1 != y2); // 0.5 dropout makes a collision vanishingly unlikely
    }
    SUBCASE("zero weights give sigmoid(0)") {
        std::fill(model.net.params().begin(), model.net.params().end(), 0.0);
        auto y = twigi_forward(model, x, 1, false, nullptr);
        CHECK(y[0] == 0.5);
    }
    SUBCASE("width mismatch is an error") {
        std::vector<double> bad(21, 0.0);
        CHECK_THROWS_AS(twigi_forward(model, bad, 1, false, nullptr), ValidationError);
    }
}

TEST_CASE("network gradient matches central finite differences") {
    AblationMask none;
    auto model = init_twigi(none, {6, 4}, 0.0, 17);
    RngStream jitter(78);
    for (auto& v : model.net.params()) v += jitter.next_uniform(-0.25, 0.25);

    RngStream rng(23);
    std::vector<std::vector<double>> pos(3, std::vector<double>(22));
    std::vector<std::vector<std::vector<double>>> neg(
        3, std::vector<std::vector<double>>(2, std::vector<double>(22)));
    for (auto& row : pos) {
        for (auto& v : row) v = rng.next_normal();
    }
    for (auto& group : neg) {
        for (auto& row : group) {
            for (auto& v : row) v = rng.next_normal();
        }
    }

    std::vector<double> grads;
    twigi_batch_loss_and_grad(model, pos, neg, 0.1, grads);

    const double h = 1e-5;
    auto& params = model.net.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        std::vector<double> scratch;
        params[i] = orig + h;
        const double up = twigi_batch_loss_and_grad(model, pos, neg, 0.1, scratch);
        scratch.clear();
        params[i] = orig - h;
        const double down = twigi_batch_loss_and_grad(model, pos, neg, 0.1, scratch);
        params[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grads[i]), 1e-4});
        CAPTURE(i);
        CHECK(std::abs(fd - grads[i]) / denom < 1e-4);
    }
}

TEST_CASE("training overfits a tiny KG") {
    PlantedKgParams params;
    params.n_entities = 100; // corruptions rarely coincide with the positive
    params.n_hubs = 20;
    params.n_predicates = 4;
    params.pool_size = 5;
    params.n_triples = 62; // ~50 train triples after the 10/10% splits
    params.seed = 4;
    auto kg = make_planted_kg(params);
    REQUIRE(kg.train.size() == 50);
    auto idx = build_index(kg);

    auto cfg = fast_config(200, 11);
    auto result = train_twigi(kg, idx, cfg, AblationMask());
    CHECK(result.epoch_loss.back() < 0.01);
}

TEST_CASE("training is deterministic; vanishing lr cannot move weights") {
    PlantedKgParams params;
    params.n_triples = 150;
    params.n_entities = 30;
    params.n_hubs = 8;
    params.seed = 5;
    auto kg = make_planted_kg(params);
    auto idx = build_index(kg);

    auto cfg = fast_config(3, 13);
    auto r1 = train_twigi(kg, idx, cfg, AblationMask());
    auto r2 = train_twigi(kg, idx, cfg, AblationMask());
    CHECK(r1.model.net.params() == r2.model.net.params());
    CHECK(r1.epoch_loss == r2.epoch_loss);

    auto frozen_cfg = cfg;
    frozen_cfg.lr = 1e-300;
    auto r3 = train_twigi(kg, idx, frozen_cfg, AblationMask());
    auto fresh = init_twigi(AblationMask(), frozen_cfg.hidden, frozen_cfg.dropout, cfg.seed);
    // zero-initialized biases pick up denormal dust, nonzero weights cannot move
    double max_diff = 0.0;
    for (std::size_t i = 0; i < fresh.net.params().size(); ++i) {
        max_diff = std::max(max_diff,
                            std::abs(r3.model.net.params()[i] - fresh.net.params()[i]));
    }
    CHECK(max_diff < 1e-200);
}

TEST_CASE("scorer is a pure function of structure") {
    auto kg = test::load_example_kg();
    auto idx = build_index(kg);
    auto cfg = fast_config(4, 19);
    auto result = train_twigi(kg, idx, cfg, AblationMask());
    auto scorer = twigi_scorer(result.model, idx);

    SUBCASE("identical feature vectors get identical scores") {
        // two completions with the same structural profile must tie
        auto t = test::make_triple(kg, "Aragorn", "Enemy-Of", "Sauron");
        auto fv = featurize(idx, t);
        for (const auto& other : kg.test) {
            if (featurize(idx, other).values == fv.values) {
                CHECK(scorer(other) == scorer(t));
            }
        }
        CHECK(scorer(t) == scorer(t));
    }
    SUBCASE("scores ignore the test split contents") {
        KnowledgeGraph altered = kg;
        altered.test.clear();
        auto idx2 = build_index(altered);
        auto scorer2 = twigi_scorer(result.model, idx2);
        auto t = test::make_triple(kg, "Gondor", "At-War-With", "Isengard");
        CHECK(scorer(t) == scorer2(t));
    }
    SUBCASE("plugs into evaluate") {
        auto rep = evaluate(scorer, kg.test, kg.all_true_triples(), TiePolicy::Realistic,
                            kg.entities.size());
        CHECK(rep.mrr > 0.0);
        CHECK(rep.mrr <= 1.0);
        CHECK(rep.query_count() == 20);
    }
}

TEST_CASE("a masked model never reads masked features") {
    AblationMask so({"so_cofreq"});
    const int so_idx = feature_index("so_cofreq");

    FeatureVector v;
    for (int i = 0; i < kNumFeatures; ++i) v[i] = 0.1 * i;
    auto x1 = mask(v, so);
    v[so_idx] += 1000.0; // perturb only the masked column
    auto x2 = mask(v, so);
    CHECK(x1 == x2);

    auto model = init_twigi(so, {6, 4}, 0.0, 29);
    auto y1 = twigi_forward(model, x1, 1, false, nullptr);
    auto y2 = twigi_forward(model, x2, 1, false, nullptr);
    CHECK(y1 == y2);
}

TEST_CASE("entity relabeling does not change candidate features") {
    PlantedKgParams params;
    params.n_triples = 120;
    params.n_entities = 20;
    params.n_hubs = 6;
    params.seed = 6;
    auto kg = make_planted_kg(params);

    // rebuild the same graph with a rotated label interning order
    KnowledgeGraph rotated;
    const int n = kg.entities.size();
    std::vector<EntityId> map(n);
    for (int e = 0; e < n; ++e) {
        map[e] = rotated.entities.intern(kg.entities.label_of((e + 7) % n));
    }
    std::vector<EntityId> to_rotated(n);
    for (int e = 0; e < n; ++e) {
        to_rotated[kg.entities.id_of(rotated.entities.label_of(e))] = e;
    }
    for (std::int32_t p = 0; p < kg.predicates.size(); ++p) {
        rotated.predicates.intern(kg.predicates.label_of(p));
    }
    auto remap = [&](const std::vector<Triple>& ts) {
        std::vector<Triple> out;
        for (const auto& t : ts) {
            out.push_back({to_rotated[t.subject], t.predicate, to_rotated[t.object]});
        }
        return out;
    };
    rotated.train = remap(kg.train);
    rotated.valid = remap(kg.valid);
    rotated.test = remap(kg.test);

    auto idx = build_index(kg);
    auto idx2 = build_index(rotated);
    for (std::size_t i = 0; i < kg.valid.size(); ++i) {
        auto a = featurize(idx, kg.valid[i]);
        auto b = featurize(idx2, rotated.valid[i]);
        CHECK(a.values == b.values);
    }
}

TEST_CASE("planted structure is learnable well above the random baseline") {
    PlantedKgParams params;
    params.n_entities = 100;
    params.n_hubs = 20;
    params.n_predicates = 4;
    params.pool_size = 5;
    params.n_triples = 800;
    params.seed = 7;
    auto kg = make_planted_kg(params);
    auto idx = build_index(kg);

    const double random_mrr = random_scorer_mrr(kg, 123);
    auto cfg = fast_config(12, 31);
    cfg.npp = 8;
    auto result = train_twigi(kg, idx, cfg, AblationMask());
    auto rep = evaluate(twigi_scorer(result.model, idx), kg.valid, kg.all_true_triples(),
                        TiePolicy::Realistic, kg.entities.size());
    CHECK(rep.mrr > 2.0 * random_mrr); // the acceptance suite runs the full 5x check
}

TEST_CASE("finetune semantics") {
    PlantedKgParams pa;
    pa.n_triples = 200;
    pa.n_entities = 40;
    pa.n_hubs = 10;
    pa.seed = 8;
    auto kg_a = make_planted_kg(pa);
    auto idx_a = build_index(kg_a);

    PlantedKgParams pb = pa;
    pb.seed = 9;
    pb.n_entities = 30;
    auto kg_b = make_planted_kg(pb);
    auto idx_b = build_index(kg_b);

    auto cfg = fast_config(3, 37);
    auto pre = train_twigi(kg_a, idx_a, cfg, AblationMask());

    SUBCASE("zero-epoch finetune is a no-op") {
        auto cfg0 = cfg;
        cfg0.epochs = 0;
        auto out = finetune_twigi(pre.model, kg_b, idx_b, cfg0);
        CHECK(out.model.net.params() == pre.model.net.params());
    }
    SUBCASE("finetune refits the normalizer on the new KG") {
        auto out = finetune_twigi(pre.model, kg_b, idx_b, cfg);
        std::vector<std::vector<double>> corpus;
        for (const auto& t : kg_b.train) {
            corpus.push_back(mask(featurize(idx_b, t), out.model.ablation));
        }
        auto expected = FeatureNormalizer::fit(corpus);
        CHECK(out.model.normalizer.mean() == expected.mean());
        CHECK(out.model.normalizer.stddev() == expected.stddev());
    }
    SUBCASE("a tampered feature list is rejected") {
        auto broken = pre.model;
        broken.feature_names.pop_back();
        CHECK_THROWS_AS(finetune_twigi(std::move(broken), kg_b, idx_b, cfg), ValidationError);
    }
}
