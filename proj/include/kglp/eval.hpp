#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kglp/kg.hpp"

namespace kglp {

// which slot of the triple is being predicted
enum class QuerySide { Subject, Object };

std::string to_string(QuerySide s);

enum class TiePolicy { Optimistic, Realistic, Pessimistic };

std::string to_string(TiePolicy p);
TiePolicy tie_policy_from_string(const std::string& s);

struct LpQuery {
    QuerySide side = QuerySide::Object;
    EntityId known = 0; // the endpoint that stays fixed
    PredicateId predicate = 0;
    EntityId ground_truth = 0;

    [[nodiscard]] Triple completed(EntityId candidate) const {
        return side == QuerySide::Object ? Triple{known, predicate, candidate}
                                         : Triple{candidate, predicate, known};
    }
    [[nodiscard]] Triple ground_truth_triple() const { return completed(ground_truth); }
};

struct RankRecord {
    LpQuery query;
    std::int64_t rank = 0;            // 1-indexed
    std::int64_t candidate_count = 0; // after filtering
};

struct EvalReport {
    double mr = 0.0;
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits5 = 0.0;
    double hits10 = 0.0;
    std::vector<std::int64_t> ranks;

    [[nodiscard]] std::size_t query_count() const { return ranks.size(); }
};

using Scorer = std::function<double(const Triple&)>;

// two queries per triple: object prediction (s,p,?) and subject prediction (?,p,o)
std::vector<LpQuery> make_queries(std::span<const Triple> triples);

// Scores every entity as the missing slot, removes known-true completions
// other than the ground truth, and reads the ground truth's 1-indexed rank
// under descending score with the requested tie handling.
RankRecord rank_query(const Scorer& scorer, const LpQuery& query, const TripleSet& filter,
                      TiePolicy policy, std::int32_t n_entities);

EvalReport evaluate(const Scorer& scorer, std::span<const Triple> test_triples,
                    const TripleSet& filter, TiePolicy policy, std::int32_t n_entities);

// aggregate metrics for an existing list of ranks
EvalReport report_from_ranks(std::span<const std::int64_t> ranks);

double mrr_of_ranks(std::span<const double> ranks);

} // namespace kglp
