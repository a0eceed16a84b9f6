#include "kglp/sampler.hpp"

namespace kglp {

std::string to_string(SamplerKind k) {
    switch (k) {
        case SamplerKind::Basic: return "basic";
        case SamplerKind::Bernoulli: return "bernoulli";
        case SamplerKind::PseudoTyped: return "pseudo";
    }
    return "?";
}

SamplerKind sampler_kind_from_string(const std::string& s) {
    if (s == "basic") return SamplerKind::Basic;
    if (s == "bernoulli") return SamplerKind::Bernoulli;
    if (s == "pseudo" || s == "pseudo-typed" || s == "pseudotyped") return SamplerKind::PseudoTyped;
    throw ValidationError("unknown negative sampler: " + s);
}

NegativeSampler::NegativeSampler(const GraphIndex& index, SamplerKind kind)
    : index_(&index), kind_(kind) {
    if (kind_ == SamplerKind::Bernoulli) {
        subject_prob_.resize(index.num_predicates(), 0.5);
        for (PredicateId p = 0; p < index.num_predicates(); ++p) {
            double tph = index.tails_per_head(p);
            double hpt = index.heads_per_tail(p);
            if (tph + hpt > 0.0) subject_prob_[p] = tph / (tph + hpt);
        }
    }
}

double NegativeSampler::subject_corruption_prob(PredicateId p) const {
    if (kind_ != SamplerKind::Bernoulli) return 0.5;
    if (p < 0 || p >= static_cast<PredicateId>(subject_prob_.size())) {
        throw ValidationError("unknown predicate id");
    }
    return subject_prob_[p];
}

Corruption NegativeSampler::sample_one(const Triple& positive, RngStream& rng,
                                       std::size_t* fallbacks) const {
    Corruption c;
    switch (kind_) {
        case SamplerKind::Basic:
            c.corrupt_subject = rng.next_bernoulli(0.5);
            c.replacement = static_cast<EntityId>(rng.next_index(index_->num_entities()));
            return c;
        case SamplerKind::Bernoulli:
            c.corrupt_subject = rng.next_bernoulli(subject_prob_[positive.predicate]);
            c.replacement = static_cast<EntityId>(rng.next_index(index_->num_entities()));
            return c;
        case SamplerKind::PseudoTyped: {
            c.corrupt_subject = rng.next_bernoulli(0.5);
            const auto& pool = c.corrupt_subject
                                   ? index_->subject_candidates(positive.predicate)
                                   : index_->object_candidates(positive.predicate);
            if (pool.empty()) {
                // predicate unseen in train: basic sampling for this triple
                if (fallbacks) ++(*fallbacks);
                c.replacement = static_cast<EntityId>(rng.next_index(index_->num_entities()));
            } else {
                c.replacement = pool[rng.next_index(pool.size())];
            }
            return c;
        }
    }
    return c;
}

NegativeBatch NegativeSampler::sample(std::span<const Triple> positives, int npp,
                                      RngStream& rng) const {
    if (npp < 1) throw ValidationError("negatives per positive must be >= 1");
    NegativeBatch batch;
    batch.negatives.resize(positives.size());
    for (std::size_t i = 0; i < positives.size(); ++i) {
        auto& negs = batch.negatives[i];
        negs.reserve(npp);
        for (int k = 0; k < npp; ++k) {
            negs.push_back(sample_one(positives[i], rng, &batch.basic_fallbacks));
        }
    }
    return batch;
}

} // namespace kglp
