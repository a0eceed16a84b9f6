#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "kglp/kg.hpp"

namespace kglp {

// Per-entity neighbourhood aggregates, precomputed so featurization is a
// handful of lookups. Degrees/frequencies are global train-split values of
// each distinct neighbour / incident predicate.
struct NeighborhoodStats {
    double min_deg_nbr = 0;
    double max_deg_nbr = 0;
    double mean_deg_nbr = 0;
    double num_nbrs = 0;
    double min_freq_rel = 0;
    double max_freq_rel = 0;
    double mean_freq_rel = 0;
    double num_rels = 0;
};

// Frequency and adjacency statistics of the training split. Immutable after
// construction; never sees valid/test triples.
class GraphIndex {
public:
    friend GraphIndex build_index(const KnowledgeGraph& kg);

    [[nodiscard]] std::int64_t degree(EntityId e) const {
        check_entity(e);
        return degree_[e];
    }
    [[nodiscard]] std::int64_t pred_freq(PredicateId p) const {
        check_predicate(p);
        return pred_freq_[p];
    }
    [[nodiscard]] std::int64_t cofreq_sp(EntityId s, PredicateId p) const {
        check_entity(s);
        check_predicate(p);
        return lookup(sp_, pair_key(s, p));
    }
    [[nodiscard]] std::int64_t cofreq_op(EntityId o, PredicateId p) const {
        check_entity(o);
        check_predicate(p);
        return lookup(op_, pair_key(o, p));
    }
    // counts the stored direction only: triples with subject s and object o
    [[nodiscard]] std::int64_t cofreq_so(EntityId s, EntityId o) const {
        check_entity(s);
        check_entity(o);
        return lookup(so_, pair_key(s, o));
    }

    [[nodiscard]] const NeighborhoodStats& neighborhood(EntityId e) const {
        check_entity(e);
        return coarse_[e];
    }
    [[nodiscard]] const std::vector<EntityId>& neighbors(EntityId e) const {
        check_entity(e);
        return neighbors_[e];
    }
    [[nodiscard]] const std::vector<PredicateId>& incident_predicates(EntityId e) const {
        check_entity(e);
        return incident_preds_[e];
    }

    // entities observed as subject / object of a predicate in train
    [[nodiscard]] const std::vector<EntityId>& subject_candidates(PredicateId p) const {
        check_predicate(p);
        return subj_candidates_[p];
    }
    [[nodiscard]] const std::vector<EntityId>& object_candidates(PredicateId p) const {
        check_predicate(p);
        return obj_candidates_[p];
    }

    // Bernoulli sampler statistics (mean tails per head / heads per tail)
    [[nodiscard]] double tails_per_head(PredicateId p) const {
        check_predicate(p);
        auto heads = subj_candidates_[p].size();
        return heads == 0 ? 0.0 : static_cast<double>(pred_freq_[p]) / static_cast<double>(heads);
    }
    [[nodiscard]] double heads_per_tail(PredicateId p) const {
        check_predicate(p);
        auto tails = obj_candidates_[p].size();
        return tails == 0 ? 0.0 : static_cast<double>(pred_freq_[p]) / static_cast<double>(tails);
    }

    [[nodiscard]] std::int32_t num_entities() const { return static_cast<std::int32_t>(degree_.size()); }
    [[nodiscard]] std::int32_t num_predicates() const { return static_cast<std::int32_t>(pred_freq_.size()); }
    [[nodiscard]] std::int64_t num_train_triples() const { return n_train_; }

private:
    using PairCount = std::unordered_map<std::uint64_t, std::int64_t>;

    static std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }
    static std::int64_t lookup(const PairCount& m, std::uint64_t key) {
        auto it = m.find(key);
        return it == m.end() ? 0 : it->second;
    }
    void check_entity(EntityId e) const {
        if (e < 0 || e >= num_entities()) throw ValidationError("unknown entity id");
    }
    void check_predicate(PredicateId p) const {
        if (p < 0 || p >= num_predicates()) throw ValidationError("unknown predicate id");
    }

    std::vector<std::int64_t> degree_;
    std::vector<std::int64_t> pred_freq_;
    PairCount sp_, op_, so_;
    std::vector<std::vector<EntityId>> neighbors_;
    std::vector<std::vector<PredicateId>> incident_preds_;
    std::vector<NeighborhoodStats> coarse_;
    std::vector<std::vector<EntityId>> subj_candidates_;
    std::vector<std::vector<EntityId>> obj_candidates_;
    std::int64_t n_train_ = 0;
};

// Builds all statistics from kg.train. A self-loop (s == o) contributes 2 to
// that node's degree, keeping the degree sum at exactly 2|train|.
GraphIndex build_index(const KnowledgeGraph& kg);

} // namespace kglp
