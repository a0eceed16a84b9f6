#include "kglp/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "kglp/rng.hpp"

namespace kglp {

namespace {

void intern_all(KnowledgeGraph& kg, int n_entities, int n_predicates) {
    for (int e = 0; e < n_entities; ++e) kg.entities.intern("e" + std::to_string(e));
    for (int p = 0; p < n_predicates; ++p) kg.predicates.intern("r" + std::to_string(p));
}

} // namespace

KnowledgeGraph make_planted_kg(const PlantedKgParams& params) {
    if (params.n_hubs > params.n_entities || params.pool_size > params.n_hubs) {
        throw ValidationError("planted KG pools larger than the hub set");
    }
    auto rng = RngStream::named(params.seed, "synthetic/planted");

    KnowledgeGraph kg;
    intern_all(kg, params.n_entities, params.n_predicates);

    // fixed per-predicate endpoint pools drawn from the hub entities
    std::vector<std::vector<EntityId>> subj_pool(params.n_predicates);
    std::vector<std::vector<EntityId>> obj_pool(params.n_predicates);
    for (int p = 0; p < params.n_predicates; ++p) {
        for (int k = 0; k < params.pool_size; ++k) {
            subj_pool[p].push_back(static_cast<EntityId>(rng.next_index(params.n_hubs)));
            obj_pool[p].push_back(static_cast<EntityId>(rng.next_index(params.n_hubs)));
        }
    }

    TripleSet seen;
    std::vector<Triple> triples;
    std::size_t attempts = 0;
    const std::size_t max_attempts = static_cast<std::size_t>(params.n_triples) * 200;
    while (triples.size() < static_cast<std::size_t>(params.n_triples) &&
           attempts++ < max_attempts) {
        const auto p = static_cast<PredicateId>(rng.next_index(params.n_predicates));
        EntityId s = rng.next_bernoulli(params.pool_prob)
                         ? subj_pool[p][rng.next_index(subj_pool[p].size())]
                         : static_cast<EntityId>(rng.next_index(params.n_entities));
        EntityId o = rng.next_bernoulli(params.pool_prob)
                         ? obj_pool[p][rng.next_index(obj_pool[p].size())]
                         : static_cast<EntityId>(rng.next_index(params.n_entities));
        if (s == o) continue;
        Triple t{s, p, o};
        if (seen.insert(t).second) triples.push_back(t);
    }
    if (triples.size() < static_cast<std::size_t>(params.n_triples)) {
        throw RuntimeFault("planted KG generation could not reach the requested triple count");
    }

    for (std::size_t i = triples.size(); i > 1; --i) {
        std::swap(triples[i - 1], triples[rng.next_index(i)]);
    }
    const auto n_valid = static_cast<std::size_t>(params.valid_frac * triples.size());
    const auto n_test = static_cast<std::size_t>(params.test_frac * triples.size());
    kg.valid.assign(triples.begin(), triples.begin() + n_valid);
    kg.test.assign(triples.begin() + n_valid, triples.begin() + n_valid + n_test);
    kg.train.assign(triples.begin() + n_valid + n_test, triples.end());
    kg.validate_ids();
    return kg;
}

KnowledgeGraph make_band_kg(const BandKgParams& params) {
    if (params.band_lo_quantile < 0.0 || params.band_hi_quantile <= params.band_lo_quantile ||
        params.band_hi_quantile > 1.0) {
        throw ValidationError("band quantiles must satisfy 0 <= lo < hi <= 1");
    }
    auto rng = RngStream::named(params.seed, "synthetic/band");

    KnowledgeGraph kg;
    intern_all(kg, params.n_entities, 2);
    const PredicateId filler = 0;
    const PredicateId target = 1;
    const int n = params.n_entities;

    // cubic spectrum: many low-degree entities, few high-degree ones
    TripleSet seen;
    for (EntityId e = 0; e < n; ++e) {
        const double frac = static_cast<double>(e) / static_cast<double>(n - 1);
        const double want = params.degree_min +
                            (params.degree_max - params.degree_min) * frac * frac * frac;
        const int out_edges = std::max(1, static_cast<int>(want / 2.0 + 0.5));
        int added = 0;
        while (added < out_edges) {
            auto v = static_cast<EntityId>(rng.next_index(n));
            if (v == e) continue;
            Triple t{e, filler, v};
            if (!seen.insert(t).second) continue;
            kg.train.push_back(t);
            ++added;
        }
    }

    // band membership from the realized filler degrees, by quantile rank
    std::vector<std::int64_t> degree(n, 0);
    for (const auto& t : kg.train) {
        ++degree[t.subject];
        ++degree[t.object];
    }
    std::vector<EntityId> by_degree(n);
    for (EntityId e = 0; e < n; ++e) by_degree[e] = e;
    std::sort(by_degree.begin(), by_degree.end(), [&](EntityId a, EntityId b) {
        return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
    });
    const auto lo = static_cast<std::size_t>(params.band_lo_quantile * n);
    const auto hi = static_cast<std::size_t>(params.band_hi_quantile * n);
    if (hi <= lo) throw ValidationError("band quantile range selects no entities");
    std::vector<EntityId> band(by_degree.begin() + lo, by_degree.begin() + hi);

    auto sample_target = [&]() {
        while (true) {
            auto s = static_cast<EntityId>(rng.next_index(n));
            EntityId o = band[rng.next_index(band.size())];
            if (s == o) continue;
            return Triple{s, target, o};
        }
    };
    auto fill = [&](std::vector<Triple>& split, int want) {
        int got = 0;
        std::size_t attempts = 0;
        while (got < want && attempts++ < 500000) {
            Triple t = sample_target();
            if (!seen.insert(t).second) continue;
            split.push_back(t);
            ++got;
        }
        if (got < want) throw RuntimeFault("could not generate enough band-rule triples");
    };
    fill(kg.train, params.n_target_train);
    fill(kg.valid, params.n_target_valid);
    fill(kg.test, params.n_target_test);
    kg.validate_ids();
    return kg;
}

KnowledgeGraph make_so_trap_kg(const SoTrapKgParams& params) {
    auto rng = RngStream::named(params.seed, "synthetic/so-trap");

    KnowledgeGraph kg;
    intern_all(kg, params.n_entities, 2);
    const PredicateId filler = 0;
    const PredicateId target = 1;

    TripleSet seen;
    std::unordered_set<std::uint64_t> train_pairs; // directed (s,o) pairs in train
    auto pair_key = [](EntityId s, EntityId o) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) << 32) |
               static_cast<std::uint32_t>(o);
    };

    // filler edges: random partners, all in train
    for (EntityId s = 0; s < params.n_entities; ++s) {
        int added = 0;
        while (added < params.filler_edges_per_entity) {
            auto o = static_cast<EntityId>(rng.next_index(params.n_entities));
            if (o == s) continue;
            Triple t{s, filler, o};
            if (!seen.insert(t).second) continue;
            kg.train.push_back(t);
            train_pairs.insert(pair_key(s, o));
            ++added;
        }
    }

    // target predicate: objects from a small pool
    std::vector<EntityId> pool;
    for (int k = 0; k < params.target_pool_size; ++k) {
        pool.push_back(static_cast<EntityId>(params.n_entities - 1 - k));
    }
    auto sample_target = [&]() {
        while (true) {
            auto s = static_cast<EntityId>(rng.next_index(params.n_entities));
            EntityId o = pool[rng.next_index(pool.size())];
            if (s == o) continue;
            return Triple{s, target, o};
        }
    };

    int added = 0;
    while (added < params.n_target_train) {
        Triple t = sample_target();
        if (!seen.insert(t).second) continue;
        kg.train.push_back(t);
        train_pairs.insert(pair_key(t.subject, t.object));
        ++added;
    }

    // held-out target triples must not reuse any train (s,o) pair
    auto fill_heldout = [&](std::vector<Triple>& split, int want) {
        int got = 0;
        std::size_t attempts = 0;
        while (got < want && attempts++ < 200000) {
            Triple t = sample_target();
            if (train_pairs.count(pair_key(t.subject, t.object))) continue;
            if (!seen.insert(t).second) continue;
            split.push_back(t);
            ++got;
        }
        if (got < want) throw RuntimeFault("could not generate enough held-out target triples");
    };
    fill_heldout(kg.valid, params.n_target_valid);
    fill_heldout(kg.test, params.n_target_test);
    kg.validate_ids();
    return kg;
}

void write_kg_dir(const KnowledgeGraph& kg, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto dump = [&](const std::vector<Triple>& split, const std::string& name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw RuntimeFault("cannot write " + name + " under " + dir);
        for (const auto& t : split) {
            out << kg.entities.label_of(t.subject) << '\t' << kg.predicates.label_of(t.predicate)
                << '\t' << kg.entities.label_of(t.object) << '\n';
        }
    };
    dump(kg.train, "train.txt");
    dump(kg.valid, "valid.txt");
    dump(kg.test, "test.txt");
}

} // namespace kglp
