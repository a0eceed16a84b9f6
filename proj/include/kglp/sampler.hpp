#pragma once

#include <span>
#include <string>
#include <vector>

#include "kglp/graph_index.hpp"
#include "kglp/rng.hpp"

namespace kglp {

enum class SamplerKind { Basic, Bernoulli, PseudoTyped };

std::string to_string(SamplerKind k);
SamplerKind sampler_kind_from_string(const std::string& s);

struct Corruption {
    bool corrupt_subject = false;
    EntityId replacement = 0;
};

inline Triple apply_corruption(const Triple& t, const Corruption& c) {
    Triple out = t;
    (c.corrupt_subject ? out.subject : out.object) = c.replacement;
    return out;
}

struct NegativeBatch {
    // per positive triple, npp corruptions
    std::vector<std::vector<Corruption>> negatives;
    // pseudo-typed positives whose predicate had no train candidates and fell
    // back to basic sampling
    std::size_t basic_fallbacks = 0;
};

// Corrupts one side of a positive triple with a replacement entity. Sampled
// "negatives" are allowed to coincide with true triples; no filtering is done.
class NegativeSampler {
public:
    NegativeSampler(const GraphIndex& index, SamplerKind kind);

    [[nodiscard]] SamplerKind kind() const { return kind_; }

    // probability of corrupting the subject side, tph/(tph+hpt); 0.5 for a
    // predicate without train statistics
    [[nodiscard]] double subject_corruption_prob(PredicateId p) const;

    Corruption sample_one(const Triple& positive, RngStream& rng, std::size_t* fallbacks) const;

    NegativeBatch sample(std::span<const Triple> positives, int npp, RngStream& rng) const;

private:
    const GraphIndex* index_;
    SamplerKind kind_;
    std::vector<double> subject_prob_; // per predicate, Bernoulli only
};

} // namespace kglp
