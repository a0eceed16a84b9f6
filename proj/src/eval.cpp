#include "kglp/eval.hpp"

#include <cmath>

namespace kglp {

std::string to_string(QuerySide s) {
    return s == QuerySide::Subject ? "subject" : "object";
}

std::string to_string(TiePolicy p) {
    switch (p) {
        case TiePolicy::Optimistic: return "optimistic";
        case TiePolicy::Realistic: return "realistic";
        case TiePolicy::Pessimistic: return "pessimistic";
    }
    return "?";
}

TiePolicy tie_policy_from_string(const std::string& s) {
    if (s == "optimistic") return TiePolicy::Optimistic;
    if (s == "realistic") return TiePolicy::Realistic;
    if (s == "pessimistic") return TiePolicy::Pessimistic;
    throw ValidationError("unknown tie policy: " + s);
}

std::vector<LpQuery> make_queries(std::span<const Triple> triples) {
    std::vector<LpQuery> out;
    out.reserve(triples.size() * 2);
    for (const auto& t : triples) {
        out.push_back({QuerySide::Object, t.subject, t.predicate, t.object});
        out.push_back({QuerySide::Subject, t.object, t.predicate, t.subject});
    }
    return out;
}

RankRecord rank_query(const Scorer& scorer, const LpQuery& query, const TripleSet& filter,
                      TiePolicy policy, std::int32_t n_entities) {
    if (query.ground_truth < 0 || query.ground_truth >= n_entities) {
        throw ValidationError("ground truth entity outside vocabulary");
    }
    const double gt_score = scorer(query.ground_truth_triple());

    std::int64_t better = 0;
    std::int64_t tied = 0;
    std::int64_t survivors = 1; // the ground truth itself
    for (EntityId e = 0; e < n_entities; ++e) {
        if (e == query.ground_truth) continue;
        const Triple cand = query.completed(e);
        if (filter.count(cand)) continue; // known-true completion, removed
        ++survivors;
        const double s = scorer(cand);
        if (s > gt_score) {
            ++better;
        } else if (s == gt_score) {
            ++tied;
        }
    }

    std::int64_t rank = 0;
    switch (policy) {
        case TiePolicy::Optimistic: rank = 1 + better; break;
        case TiePolicy::Pessimistic: rank = 1 + better + tied; break;
        case TiePolicy::Realistic: {
            const double best = static_cast<double>(1 + better);
            const double worst = static_cast<double>(1 + better + tied);
            rank = static_cast<std::int64_t>(std::floor((best + worst) / 2.0 + 0.5));
            break;
        }
    }
    return {query, rank, survivors};
}

EvalReport evaluate(const Scorer& scorer, std::span<const Triple> test_triples,
                    const TripleSet& filter, TiePolicy policy, std::int32_t n_entities) {
    if (test_triples.empty()) throw ValidationError("cannot evaluate an empty triple set");
    const auto queries = make_queries(test_triples);
    std::vector<std::int64_t> ranks;
    ranks.reserve(queries.size());
    for (const auto& q : queries) {
        ranks.push_back(rank_query(scorer, q, filter, policy, n_entities).rank);
    }
    return report_from_ranks(ranks);
}

EvalReport report_from_ranks(std::span<const std::int64_t> ranks) {
    if (ranks.empty()) throw ValidationError("cannot aggregate an empty rank list");
    EvalReport r;
    r.ranks.assign(ranks.begin(), ranks.end());
    const double n = static_cast<double>(ranks.size());
    double sum = 0.0, rsum = 0.0;
    std::int64_t h1 = 0, h3 = 0, h5 = 0, h10 = 0;
    for (std::int64_t rank : ranks) {
        sum += static_cast<double>(rank);
        rsum += 1.0 / static_cast<double>(rank);
        h1 += rank <= 1;
        h3 += rank <= 3;
        h5 += rank <= 5;
        h10 += rank <= 10;
    }
    r.mr = sum / n;
    r.mrr = rsum / n;
    r.hits1 = static_cast<double>(h1) / n;
    r.hits3 = static_cast<double>(h3) / n;
    r.hits5 = static_cast<double>(h5) / n;
    r.hits10 = static_cast<double>(h10) / n;
    return r;
}

double mrr_of_ranks(std::span<const double> ranks) {
    if (ranks.empty()) throw ValidationError("cannot aggregate an empty rank list");
    double rsum = 0.0;
    for (double rank : ranks) rsum += 1.0 / rank;
    return rsum / static_cast<double>(ranks.size());
}

} // namespace kglp
