#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kglp/errors.hpp"

namespace kglp {

using EntityId = std::int32_t;
using PredicateId = std::int32_t;

struct Triple {
    EntityId subject = 0;
    PredicateId predicate = 0;
    EntityId object = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(t.subject);
        h = h * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(t.predicate);
        h = h * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(t.object);
        h ^= h >> 29;
        return static_cast<std::size_t>(h);
    }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

// label <-> dense id bijection, ids assigned in first-appearance order
class Vocab {
public:
    std::int32_t intern(const std::string& label) {
        auto it = ids_.find(label);
        if (it != ids_.end()) return it->second;
        auto id = static_cast<std::int32_t>(labels_.size());
        labels_.push_back(label);
        ids_.emplace(labels_.back(), id);
        return id;
    }

    [[nodiscard]] std::int32_t id_of(const std::string& label) const {
        auto it = ids_.find(label);
        if (it == ids_.end()) throw ValidationError("unknown label: " + label);
        return it->second;
    }

    [[nodiscard]] bool contains(const std::string& label) const { return ids_.count(label) > 0; }
    [[nodiscard]] const std::string& label_of(std::int32_t id) const { return labels_.at(id); }
    [[nodiscard]] std::int32_t size() const { return static_cast<std::int32_t>(labels_.size()); }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::int32_t> ids_;
};

enum class Split { Train, Valid, Test };

[[nodiscard]] const char* split_name(Split s);

struct LoadReport {
    std::size_t duplicates_train = 0;
    std::size_t duplicates_valid = 0;
    std::size_t duplicates_test = 0;

    [[nodiscard]] std::size_t total_duplicates() const {
        return duplicates_train + duplicates_valid + duplicates_test;
    }
};

struct KnowledgeGraph {
    Vocab entities;
    Vocab predicates;
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
    LoadReport load_report;

    [[nodiscard]] const std::vector<Triple>& split(Split s) const {
        switch (s) {
            case Split::Valid: return valid;
            case Split::Test: return test;
            default: return train;
        }
    }

    // union of all three splits, the standard filter set for ranking
    [[nodiscard]] TripleSet all_true_triples() const;

    void validate_ids() const;
};

// Reads tab-separated triple files (exactly two tabs per non-empty line) into
// a KnowledgeGraph. Vocabulary ids are assigned in first-appearance order
// scanning train, then valid, then test. Duplicate lines within one split are
// dropped and counted; a triple occurring in two splits is an error.
KnowledgeGraph load_kg(const std::string& train_path,
                       const std::string& valid_path,
                       const std::string& test_path);

// Single-file variant used by tests and synthetic pipelines.
std::vector<Triple> parse_triples(const std::string& path, Vocab& entities, Vocab& predicates,
                                  std::size_t* duplicates = nullptr);

} // namespace kglp
