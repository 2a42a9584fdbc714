#include "doctest.h"
#include "fixtures.hpp"
#include "sparql_oracle.hpp"

#include "patchr/update.hpp"

using namespace patchr;

namespace {

Patch ohio_deletion() {
    Patch p = fixtures::ohio_patch();
    p.update.target_subject = fixtures::dbp("Ohio");
    p.update.insertions.clear();
    p.update.deletions = {PredicateObject{fixtures::dbo("language"), Term::iri(fixtures::dbp("English_language"))}};
    p.types = {PatchType::wrong_fact()};
    return p;
}

Patch oregon_modify() {
    Patch p = fixtures::ohio_patch();
    p.update.deletions = {PredicateObject{fixtures::dbo("language"), Term::iri(fixtures::dbp("De_jure"))}};
    return p;
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

// Triples inside every { ... } block of a rendering, parsed with the
// rendering's own prefixes.
std::set<Triple> block_triples(const std::string& sparql) {
    std::string turtle;
    const rdf::PrefixMap prefixes;
    for (const auto& [label, ns] : prefixes.entries()) turtle += "@prefix " + label + ": <" + ns + "> .\n";
    std::size_t pos = 0;
    while ((pos = sparql.find('{', pos)) != std::string::npos) {
        std::size_t close = sparql.find('}', pos);
        std::string inner = sparql.substr(pos + 1, close - pos - 1);
        if (inner.find('{') == std::string::npos) turtle += inner + "\n";
        pos += 1;
    }
    return rdf::parse_turtle(turtle).graph.triples();
}

rdf::Graph quiz_graph() { return rdf::parse_turtle(fixtures::read_file("quiz_graph.ttl")).graph; }

}  // namespace

TEST_CASE("golden SPARQL rendering") {
    std::string legacy = to_sparql(fixtures::ohio_patch(), SparqlDialect::Legacy);
    CHECK(fixtures::normalize_ws(legacy) == fixtures::kOhioSparql);
    // Fixed layout, whitespace-normalised.
    CHECK(legacy ==
          "INSERT DATA INTO <http://dbpedia.org/> {\n"
          "  dbp:Oregon\n"
          "     dbo:language dbp:English_language .\n"
          "}\n");
    CHECK(to_sparql(fixtures::ohio_patch(), SparqlDialect::Legacy, rdf::PrefixMap(), true) ==
          "PREFIX dbo: <http://dbpedia.org/ontology/>\n"
          "PREFIX dbp: <http://dbpedia.org/resource/>\n"
          "\n" + legacy);
    CHECK(to_sparql(fixtures::ohio_patch(), SparqlDialect::Sparql11) ==
          "INSERT DATA {\n"
          "  GRAPH <http://dbpedia.org/> {\n"
          "    dbp:Oregon\n"
          "       dbo:language dbp:English_language .\n"
          "  }\n"
          "}\n");
    // Without prefixes every IRI is written in full.
    CHECK(fixtures::normalize_ws(to_sparql(fixtures::ohio_patch(), SparqlDialect::Legacy,
                                           rdf::PrefixMap::empty_map())) ==
          "INSERT DATA INTO <http://dbpedia.org/> { <http://dbpedia.org/resource/Oregon> "
          "<http://dbpedia.org/ontology/language> <http://dbpedia.org/resource/English_language> . }");
}

TEST_CASE("to_sparql: deletion, modify and literals") {
    std::string del = to_sparql(ohio_deletion(), SparqlDialect::Sparql11);
    CHECK(fixtures::normalize_ws(del) ==
          "DELETE DATA { GRAPH <http://dbpedia.org/> { dbp:Ohio dbo:language dbp:English_language . } }");
    CHECK(count(del, "DATA") == 1);
    CHECK(fixtures::normalize_ws(to_sparql(ohio_deletion(), SparqlDialect::Legacy)) ==
          "DELETE DATA FROM <http://dbpedia.org/> { dbp:Ohio dbo:language dbp:English_language . }");

    for (auto dialect : {SparqlDialect::Legacy, SparqlDialect::Sparql11}) {
        std::string modify = to_sparql(oregon_modify(), dialect);
        auto d = modify.find("DELETE DATA");
        auto i = modify.find("INSERT DATA");
        REQUIRE(d != std::string::npos);
        REQUIRE(i != std::string::npos);
        CHECK(d < i);
        CHECK(modify.find(" ;\n", d) < i);
    }

    Patch lit = fixtures::ohio_patch();
    lit.update.insertions = {PredicateObject{fixtures::dbo("motto"), Term::lang_literal("She \"flies\"\n", "la")}};
    CHECK(to_sparql(lit).find("dbo:motto \"She \\\"flies\\\"\\n\"@la .") != std::string::npos);

    Patch invalid = fixtures::ohio_patch();
    invalid.update.insertions.clear();
    CHECK_THROWS_AS(to_sparql(invalid), ValidationError);
}

TEST_CASE("Legacy and Sparql11 carry the same triples") {
    fixtures::TermGen gen(31);
    for (int i = 0; i < 200; ++i) {
        Patch p = gen.patch();
        auto legacy = block_triples(to_sparql(p, SparqlDialect::Legacy));
        auto modern = block_triples(to_sparql(p, SparqlDialect::Sparql11));
        CHECK(legacy == modern);
        std::set<Triple> expected;
        for (const Triple& t : p.update.insert_triples()) expected.insert(t);
        for (const Triple& t : p.update.delete_triples()) expected.insert(t);
        CHECK(legacy == expected);
    }
}

TEST_CASE("export_updates") {
    const Iri base = fixtures::repo("");
    PatchFilter all;
    CHECK(export_updates(RepositoryState(base), all, SparqlDialect::Legacy).empty());

    Patch c = fixtures::ohio_patch();
    c.id.reset();
    auto s = submit_patch(RepositoryState(base), c, fixtures::repo("Player_25"), fixtures::kOhioTime).state;
    PatchFilter f;
    f.dataset = Iri(fixtures::kDBpediaDataset);
    f.min_advocates = 1;
    std::string one = export_updates(s, f, SparqlDialect::Legacy, rdf::PrefixMap(), false);
    CHECK(count(one, "INSERT DATA") == 1);
    CHECK(one == "# <http://example.org/repo/patch/1>\n" + to_sparql(fixtures::ohio_patch(), SparqlDialect::Legacy));

    Patch del = ohio_deletion();
    del.id.reset();
    del.provenance[0].performed_at = Timestamp(fixtures::kOhioTime.unix_seconds() + 60);
    s = submit_patch(s, del, fixtures::repo("Player_25"), del.provenance[0].performed_at).state;
    Patch mod = oregon_modify();
    mod.id.reset();
    mod.update.target_subject = fixtures::dbp("Dances_with_Wolves");
    mod.provenance[0].performed_at = Timestamp(fixtures::kOhioTime.unix_seconds() + 120);
    s = submit_patch(s, mod, fixtures::repo("Player_25"), mod.provenance[0].performed_at).state;

    std::string three = export_updates(s, all, SparqlDialect::Sparql11);
    CHECK(three.rfind("PREFIX dbo: <http://dbpedia.org/ontology/>\nPREFIX dbp: <http://dbpedia.org/resource/>\n\n", 0) == 0);
    CHECK(count(three, "PREFIX") == 2);
    // Most recent first: patch 3, 2, 1.
    auto p3 = three.find("patch/3>"), p2 = three.find("patch/2>"), p1 = three.find("patch/1>");
    CHECK(p3 < p2);
    CHECK(p2 < p1);
    CHECK(count(three, " ;\n\n") == 2);
}

TEST_CASE("apply_instruction on the quiz graph") {
    rdf::Graph g = quiz_graph();
    auto report = apply_instruction(g, fixtures::ohio_patch().update);
    CHECK(g.size() == 4);
    CHECK(report == ApplyReport{1, 0, {}});

    rdf::Graph once = g;
    auto second = apply_instruction(g, fixtures::ohio_patch().update);
    CHECK(g == once);
    CHECK(second.added == 0);

    rdf::Graph before = g;
    Patch absent = ohio_deletion();
    absent.update.target_subject = fixtures::dbp("Oregon");
    absent.update.deletions = {PredicateObject{fixtures::dbo("language"), Term::iri(fixtures::dbp("French"))}};
    auto warn = apply_instruction(g, absent.update);
    CHECK(g == before);
    CHECK(warn.absent_deletions.size() == 1);
    CHECK(warn.removed == 0);

    auto removed = apply_instruction(g, ohio_deletion().update);
    CHECK(removed.removed == 1);
    CHECK(g.size() == 3);

    rdf::Graph named(Iri("http://example.org/other/"));
    named.insert(*quiz_graph().begin());
    rdf::Graph untouched = named;
    CHECK_THROWS_AS(apply_instruction(named, fixtures::ohio_patch().update), Error);
    CHECK(named == untouched);
    named.set_name(Iri(fixtures::kDBpediaGraph));
    CHECK(apply_instruction(named, fixtures::ohio_patch().update).added == 1);
}

TEST_CASE("apply_instruction is idempotent and commutes on disjoint subjects") {
    fixtures::TermGen gen(77);
    for (int round = 0; round < 300; ++round) {
        rdf::Graph g = oracle::random_graph(gen, 20);
        auto u1 = oracle::random_instruction(gen, g);
        auto u2 = oracle::random_instruction(gen, g);

        rdf::Graph once = g;
        apply_instruction(once, u1);
        rdf::Graph twice = once;
        auto again = apply_instruction(twice, u1);
        CHECK(twice == once);
        CHECK(again.added == 0);
        CHECK(again.removed == 0);

        // Set semantics: (g \ D) ∪ I.
        std::set<Triple> expected = g.triples();
        for (const Triple& t : u1.delete_triples()) expected.erase(t);
        for (const Triple& t : u1.insert_triples()) expected.insert(t);
        CHECK(once.triples() == expected);

        if (u1.target_subject != u2.target_subject) {
            rdf::Graph a = g, b = g;
            apply_instruction(a, u1);
            apply_instruction(a, u2);
            apply_instruction(b, u2);
            apply_instruction(b, u1);
            CHECK(a == b);
        }
        CHECK(once.index_consistent());
    }
}

TEST_CASE("apply_instruction agrees with the reference SPARQL engine") {
    fixtures::TermGen gen(2024);
    std::vector<oracle::Case> cases;
    std::vector<rdf::Graph> expected;
    for (int i = 0; i < 40; ++i) {
        rdf::Graph g = oracle::random_graph(gen, 50);
        Patch p = oracle::wrap(oracle::random_instruction(gen, g));
        cases.push_back({g, to_sparql(p, SparqlDialect::Sparql11, rdf::PrefixMap(), true)});
        apply_instruction(g, p.update);
        expected.push_back(g);
    }
    auto results = oracle::run(cases, fixtures::kDBpediaGraph);
    REQUIRE(results.size() == cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
        std::string diff;
        for (const Triple& t : results[i]) {
            if (!expected[i].contains(t)) diff += "  engine only: " + t.to_ntriples() + "\n";
        }
        for (const Triple& t : expected[i]) {
            if (!results[i].contains(t)) diff += "  apply only:  " + t.to_ntriples() + "\n";
        }
        INFO("case " << i << "\n" << cases[i].update << diff);
        CHECK(rdf::isomorphic(results[i], expected[i].triples()));
    }
}
