#pragma once

// Shared fixtures and generators for the test binaries.

#include "patchr/patch.hpp"
#include "patchr/turtle.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#ifndef PATCHR_TEST_DATA
#error "PATCHR_TEST_DATA must point at tests/data"
#endif

namespace fixtures {

using namespace patchr;

inline std::string read_file(const std::string& name) {
    std::ifstream in(std::string(PATCHR_TEST_DATA) + "/" + name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const std::string kRepo = "http://example.org/repo/";
inline const std::string kDbp = "http://dbpedia.org/resource/";
inline const std::string kDbo = "http://dbpedia.org/ontology/";
inline const std::string kDBpediaDataset = "http://dbpedia.org/void.ttl#DBpedia";
inline const std::string kDBpediaGraph = "http://dbpedia.org/";

inline Iri repo(const std::string& local) { return Iri(kRepo + local); }
inline Iri dbp(const std::string& local) { return Iri(kDbp + local); }
inline Iri dbo(const std::string& local) { return Iri(kDbo + local); }

inline const Timestamp kOhioTime = Timestamp::parse("2012-02-15T14:30:00Z");

// The patch described by tests/data/ohio_patch.ttl, built field by field.
inline Patch ohio_patch() {
    return Patch{
        .id = repo("Patch_15"),
        .update = UpdateInstruction{
            .target_graph = Iri(kDBpediaGraph),
            .target_subject = dbp("Oregon"),
            .insertions = {PredicateObject{dbo("language"), Term::iri(dbp("English_language"))}},
            .deletions = {},
        },
        .dataset = Iri(kDBpediaDataset),
        .types = {PatchType::missing_fact()},
        .status = PatchStatus::Active,
        .advocates = {repo("Player_25")},
        .criticisers = {},
        .groups = {},
        .comment = std::nullopt,
        .provenance = {ProvenanceEvent{repo("WhoKnows"), repo("Player_25"), kOhioTime}},
    };
}

inline std::string normalize_ws(const std::string& text) {
    std::string out;
    bool space = false;
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

inline const std::string kOhioSparql =
    "INSERT DATA INTO <http://dbpedia.org/> { dbp:Oregon dbo:language dbp:English_language . }";

// Random terms over small vocabularies so collisions happen.
class TermGen {
public:
    explicit TermGen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    Term iri(std::size_t pool = 8) {
        static const char* bases[] = {"http://dbpedia.org/resource/", "http://dbpedia.org/ontology/",
                                      "http://example.org/x#", "urn:test:"};
        std::size_t i = below(pool);
        return Term::iri(std::string(bases[i % 4]) + "r" + std::to_string(i));
    }

    Term literal() {
        static const char* lexicals[] = {"plain", "with \"quotes\"", "line\nbreak", "tab\tand\\slash",
                                         "caf\xC3\xA9", "", "a|DEL:b", "2012-02-15T14:30:00Z"};
        std::string lex = lexicals[below(8)];
        switch (below(3)) {
        case 0: return Term::literal(lex);
        case 1: return Term::lang_literal(lex, chance(0.5) ? "en" : "de-at");
        default: return Term::literal(lex, "http://example.org/types#code");
        }
    }

    Term object(std::size_t pool = 8) { return chance(0.7) ? iri(pool) : literal(); }

    Term predicate(std::size_t pool = 4) {
        return Term::iri("http://dbpedia.org/ontology/p" + std::to_string(below(pool)));
    }

    Iri agent(std::size_t pool = 5) { return Iri(kRepo + "agent" + std::to_string(below(pool))); }

    std::set<PredicateObject> pairs(std::size_t max) {
        std::set<PredicateObject> out;
        std::size_t n = below(max + 1);
        for (std::size_t i = 0; i < n; ++i) out.insert(PredicateObject{predicate().as_iri(), object()});
        return out;
    }

    // A valid patch with every optional field exercised now and then.
    Patch patch(bool with_id = true) {
        Patch p{
            .id = std::nullopt,
            .update = UpdateInstruction{
                .target_graph = Iri(kDBpediaGraph),
                .target_subject = iri().as_iri(),
                .insertions = pairs(3),
                .deletions = {},
            },
            .dataset = Iri(kDBpediaDataset),
        };
        if (with_id) p.id = repo("Patch_" + std::to_string(below(1000)));
        for (const auto& po : pairs(2)) {
            if (!p.update.insertions.contains(po)) p.update.deletions.insert(po);
        }
        if (p.update.insertions.empty() && p.update.deletions.empty()) {
            p.update.insertions.insert(PredicateObject{predicate().as_iri(), iri()});
        }
        static const PatchType types[] = {PatchType::wrong_fact(), PatchType::missing_fact(),
                                          PatchType::encoding_error(), PatchType::datatype_error(),
                                          PatchType::parse("http://example.org/types#Custom")};
        p.types.insert(types[below(5)]);
        if (chance(0.3)) p.types.insert(types[below(5)]);
        p.status = static_cast<PatchStatus>(below(3));
        for (std::size_t i = below(3); i > 0; --i) p.advocates.insert(agent());
        for (std::size_t i = below(3); i > 0; --i) {
            Iri a = agent();
            if (!p.advocates.contains(a)) p.criticisers.insert(a);
        }
        if (chance(0.3)) p.groups.insert(repo("group/" + std::to_string(below(3))));
        if (chance(0.3)) p.comment = chance(0.5) ? "looks wrong" : "multi\nline \"comment\"";
        std::int64_t t = 1329316200 + static_cast<std::int64_t>(below(100000));
        for (std::size_t i = 1 + below(3); i > 0; --i) {
            std::optional<Iri> actor;
            if (chance(0.7)) actor = agent();
            p.provenance.push_back(ProvenanceEvent{agent(), actor, Timestamp(t)});
            t += static_cast<std::int64_t>(below(2) * 60);
        }
        std::sort(p.provenance.begin(), p.provenance.end(), provenance_before);
        return p;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace fixtures
