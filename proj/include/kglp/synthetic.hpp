#pragma once

#include <cstdint>
#include <string>

#include "kglp/kg.hpp"

namespace kglp {

// Synthetic KG whose links form preferentially among designated per-predicate
// pools of hub entities, so true triples carry systematically higher
// degree/co-frequency features than random corruptions. Hubs accumulate high
// degree by construction; the same pool rule can be planted across different
// KGs to exercise transfer learning.
struct PlantedKgParams {
    int n_entities = 100;
    int n_hubs = 20;        // entities eligible for pools
    int n_predicates = 4;
    int pool_size = 5;      // per predicate, per side
    int n_triples = 800;    // total across splits
    double pool_prob = 0.9; // chance an endpoint is drawn from its pool
    double valid_frac = 0.1;
    double test_frac = 0.1;
    std::uint64_t seed = 0;
};

KnowledgeGraph make_planted_kg(const PlantedKgParams& params);

// KG whose target predicate links to objects inside a narrow band of the
// degree spectrum. Filler edges realize a skewed continuous spectrum, and
// the band is defined by quantile position, so structurally twin KGs at
// different scales share the rule after z-scoring. Train triples cover only
// part of the band; ranking the uncovered members hinges on how precisely a
// model has learned the band edges, which improves with training data. This
// gives transfer learning from a larger twin a sample-complexity advantage
// that identity-based pools (shortcut by co-frequency features) do not.
struct BandKgParams {
    int n_entities = 240;
    double degree_min = 2.0;
    double degree_max = 40.0;
    double band_lo_quantile = 0.55;
    double band_hi_quantile = 0.70;
    int n_target_train = 240;
    int n_target_valid = 60;
    int n_target_test = 30;
    std::uint64_t seed = 0;
};

KnowledgeGraph make_band_kg(const BandKgParams& params);

// KG built so that subject-object co-frequency is a perfect separator during
// training but a trap at test time: every entity has random "filler" edges
// (creating many train (s,o) pairs), while the held-out triples of the target
// predicate never reuse a train (s,o) pair. The target predicate's objects
// come from a small pool, so it stays learnable without the co-frequency
// feature.
struct SoTrapKgParams {
    int n_entities = 60;
    int filler_edges_per_entity = 3;
    int target_pool_size = 5;
    int n_target_train = 150;
    int n_target_valid = 30;
    int n_target_test = 30;
    std::uint64_t seed = 0;
};

KnowledgeGraph make_so_trap_kg(const SoTrapKgParams& params);

// writes train.txt / valid.txt / test.txt under dir (created if missing)
void write_kg_dir(const KnowledgeGraph& kg, const std::string& dir);

} // namespace kglp
