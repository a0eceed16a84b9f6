#include "kglp/kg.hpp"

#include <fstream>
#include <sstream>

namespace kglp {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "?";
}

TripleSet KnowledgeGraph::all_true_triples() const {
    TripleSet all;
    all.reserve(train.size() + valid.size() + test.size());
    for (const auto& t : train) all.insert(t);
    for (const auto& t : valid) all.insert(t);
    for (const auto& t : test) all.insert(t);
    return all;
}

void KnowledgeGraph::validate_ids() const {
    auto check = [&](const std::vector<Triple>& ts, const char* name) {
        for (const auto& t : ts) {
            if (t.subject < 0 || t.subject >= entities.size() ||
                t.object < 0 || t.object >= entities.size() ||
                t.predicate < 0 || t.predicate >= predicates.size()) {
                throw ValidationError(std::string("triple with out-of-range id in ") + name);
            }
        }
    };
    check(train, "train");
    check(valid, "valid");
    check(test, "test");
}

namespace {

std::vector<Triple> parse_file(const std::string& path, Vocab& entities, Vocab& predicates,
                               std::size_t& duplicates) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open triple file: " + path);

    std::vector<Triple> out;
    TripleSet seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        auto tab1 = line.find('\t');
        auto tab2 = (tab1 == std::string::npos) ? std::string::npos : line.find('\t', tab1 + 1);
        auto tab3 = (tab2 == std::string::npos) ? std::string::npos : line.find('\t', tab2 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos || tab3 != std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected exactly three tab-separated fields";
            throw ParseError(msg.str());
        }
        std::string s = line.substr(0, tab1);
        std::string p = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::string o = line.substr(tab2 + 1);
        if (s.empty() || p.empty() || o.empty()) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": empty field";
            throw ParseError(msg.str());
        }

        Triple t{entities.intern(s), predicates.intern(p), entities.intern(o)};
        if (!seen.insert(t).second) {
            ++duplicates;
            continue;
        }
        out.push_back(t);
    }
    return out;
}

} // namespace

std::vector<Triple> parse_triples(const std::string& path, Vocab& entities, Vocab& predicates,
                                  std::size_t* duplicates) {
    std::size_t dups = 0;
    auto out = parse_file(path, entities, predicates, dups);
    if (duplicates) *duplicates = dups;
    return out;
}

KnowledgeGraph load_kg(const std::string& train_path,
                       const std::string& valid_path,
                       const std::string& test_path) {
    KnowledgeGraph kg;
    kg.train = parse_file(train_path, kg.entities, kg.predicates, kg.load_report.duplicates_train);
    kg.valid = parse_file(valid_path, kg.entities, kg.predicates, kg.load_report.duplicates_valid);
    kg.test = parse_file(test_path, kg.entities, kg.predicates, kg.load_report.duplicates_test);

    TripleSet train_set(kg.train.begin(), kg.train.end());
    for (const auto& t : kg.valid) {
        if (train_set.count(t)) {
            throw ValidationError("triple appears in both train and valid: (" +
                                  kg.entities.label_of(t.subject) + ", " +
                                  kg.predicates.label_of(t.predicate) + ", " +
                                  kg.entities.label_of(t.object) + ")");
        }
    }
    TripleSet valid_set(kg.valid.begin(), kg.valid.end());
    for (const auto& t : kg.test) {
        if (train_set.count(t) || valid_set.count(t)) {
            throw ValidationError("triple appears in two splits: (" +
                                  kg.entities.label_of(t.subject) + ", " +
                                  kg.predicates.label_of(t.predicate) + ", " +
                                  kg.entities.label_of(t.object) + ")");
        }
    }
    kg.validate_ids();
    return kg;
}

} // namespace kglp
