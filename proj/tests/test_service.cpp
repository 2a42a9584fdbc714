#include "doctest.h"
#include "fixtures.hpp"

#include "patchr/json_codec.hpp"
#include "patchr/patch_turtle.hpp"
#include "live_server.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace patchr;
using fixtures::dbo;
using fixtures::dbp;
using fixtures::repo;

namespace {

const std::string kOhioPatch = fixtures::read_file("ohio_patch.ttl");

Json body_json(const httplib::Result& r) { return Json::parse(r->body); }

httplib::Result post_json(httplib::Client& c, const std::string& path, const Json& body) {
    return c.Post(path, body.dump(), "application/json");
}

// the Ohio patch with the id the repository mints for the first patch.
Patch minted_ohio() {
    Patch p = fixtures::ohio_patch();
    p.id = repo("patch/1");
    return p;
}

Patch candidate(const std::string& subject, std::int64_t offset = 0) {
    Patch p = fixtures::ohio_patch();
    p.id.reset();
    p.update.target_subject = dbp(subject);
    p.provenance[0].performed_at = Timestamp(fixtures::kOhioTime.unix_seconds() + offset);
    return p;
}

}  // namespace

TEST_CASE("spec examples over HTTP") {
    LiveServer live;
    auto c = live.client();

    auto empty = c.Get("/patches?order=popular&limit=10");
    REQUIRE(empty);
    CHECK(empty->status == 200);
    CHECK(body_json(empty) == Json::array());

    auto created = c.Post("/patches", kOhioPatch, "text/turtle");
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(created->get_header_value("Location") == fixtures::kRepo + "patch/1");
    Json body = body_json(created);
    CHECK(body["id"] == fixtures::kRepo + "patch/1");
    CHECK(body["merged"] == false);
    CHECK(patch_from_json(body["patch"]) == minted_ohio());

    auto sparql = c.Get("/patches/1/sparql?dialect=legacy");
    REQUIRE(sparql);
    CHECK(sparql->status == 200);
    CHECK(sparql->get_header_value("Content-Type") == "application/sparql-update");
    CHECK(fixtures::normalize_ws(sparql->body) == fixtures::kOhioSparql);
    auto modern = c.Get("/patches/1/sparql");
    CHECK(modern->body.find("GRAPH <http://dbpedia.org/>") != std::string::npos);
    auto headed = c.Get("/patches/1/sparql?dialect=legacy&prefixes=true");
    CHECK(headed->body.rfind("PREFIX dbo:", 0) == 0);
    CHECK(c.Get("/patches/1/sparql?dialect=sparql2")->status == 400);
}

TEST_CASE("patch round trip as Turtle and JSON") {
    LiveServer live;
    auto c = live.client();
    REQUIRE(c.Post("/patches", kOhioPatch, "text/turtle; charset=utf-8")->status == 201);

    httplib::Headers turtle{{"Accept", "text/turtle"}};
    auto ttl = c.Get("/patches/1", turtle);
    REQUIRE(ttl);
    CHECK(ttl->status == 200);
    CHECK(ttl->get_header_value("Content-Type") == "text/turtle");
    auto got = rdf::parse_turtle(ttl->body).graph;
    auto expected = rdf::parse_turtle(patch_to_turtle(minted_ohio())).graph;
    CHECK(rdf::isomorphic(got, expected));
    CHECK(patch_from_turtle(ttl->body) == std::vector<Patch>{minted_ohio()});

    // The same patch by full IRI, and as JSON by default.
    auto by_iri = c.Get("/patches/" + percent_encode(fixtures::kRepo + "patch/1"));
    REQUIRE(by_iri);
    CHECK(by_iri->status == 200);
    CHECK(patch_from_json(body_json(by_iri)) == minted_ohio());
    CHECK(c.Get("/patches/1?format=turtle")->body == ttl->body);

    // A merge adds provenance; the Turtle view carries it.
    Patch again = candidate("Oregon", 3600);
    auto merged = c.Post("/patches?agent=" + percent_encode(repo("Player_7").str()), patch_to_json(again).dump(),
                         "application/json");
    REQUIRE(merged);
    CHECK(merged->status == 200);
    CHECK(body_json(merged)["merged"] == true);
    Patch after = patch_from_turtle(c.Get("/patches/1", turtle)->body).front();
    CHECK(after.advocates == std::set<Iri>{repo("Player_25"), repo("Player_7")});
    REQUIRE(after.provenance.size() == 2);
    CHECK(after.provenance[1].involved_actor == repo("Player_7"));

    // JSON submission of a new instruction.
    auto ohio = c.Post("/patches", patch_to_json(candidate("Ohio")).dump(), "application/json");
    REQUIRE(ohio);
    CHECK(ohio->status == 201);
    CHECK(ohio->get_header_value("Location") == fixtures::kRepo + "patch/2");

    auto list = c.Get("/patches", turtle);
    CHECK(patch_from_turtle(list->body).size() == 2);
}

TEST_CASE("error statuses") {
    LiveServer live;
    auto c = live.client();

    auto unsupported = c.Post("/patches", kOhioPatch, "text/plain");
    REQUIRE(unsupported);
    CHECK(unsupported->status == 415);
    CHECK(body_json(unsupported)["error"] == "UnsupportedMediaType");

    auto syntax = c.Post("/patches", "@prefix x: <http://e/> .\nx:a x:b", "text/turtle");
    CHECK(syntax->status == 400);
    CHECK(body_json(syntax)["error"] == to_string(ErrorCode::Syntax));
    CHECK(body_json(syntax)["line"] == 2);

    Patch untyped = candidate("Ohio");
    untyped.types.clear();
    auto invalid = c.Post("/patches", patch_to_json(untyped).dump(), "application/json");
    CHECK(invalid->status == 400);
    CHECK(body_json(invalid)["violations"] == Json::array({"MissingType"}));

    auto structural = c.Post("/patches", "@prefix pro: <http://purl.org/hpi/patchr#> .\n<http://e/p> a pro:Patch .",
                             "text/turtle");
    CHECK(structural->status == 400);
    CHECK(body_json(structural)["kind"] == "MissingUpdateInstruction");
    CHECK(c.Post("/patches", "", "text/turtle")->status == 400);
    CHECK(c.Post("/patches", "{not json", "application/json")->status == 400);

    CHECK(c.Get("/patches/99")->status == 404);
    CHECK(c.Get("/patches/not-an-iri")->status == 404);
    CHECK(body_json(c.Get("/patches/99"))["error"] == "UnknownPatch");
    CHECK(post_json(c, "/patches/99/votes", {{"agent", repo("a").str()}, {"position", "advocate"}})->status == 404);

    REQUIRE(c.Post("/patches", kOhioPatch, "text/turtle")->status == 201);
    CHECK(c.Post("/patches/1/votes", "agent=x", "application/x-www-form-urlencoded")->status == 415);
    CHECK(post_json(c, "/patches/1/votes", {{"agent", repo("a").str()}, {"position", "maybe"}})->status == 400);
    CHECK(post_json(c, "/patches/1/votes", {{"position", "advocate"}})->status == 400);
    CHECK(post_json(c, "/patches/1/status", {{"status", "resolved"}, {"agent", repo("curator").str()}})->status == 200);
    auto illegal = post_json(c, "/patches/1/status", {{"status", "active"}, {"agent", repo("curator").str()}});
    CHECK(illegal->status == 409);
    auto terminal = post_json(c, "/patches/1/votes", {{"agent", repo("a").str()}, {"position", "advocate"}});
    CHECK(terminal->status == 409);
    CHECK(body_json(terminal)["error"] == "TerminalPatch");

    CHECK(c.Get("/patches?limit=0")->status == 400);
    CHECK(c.Get("/patches?order=oldest")->status == 400);
    CHECK(c.Get("/patches?minAdvocates=-1")->status == 400);
    CHECK(c.Get("/patches?status=open")->status == 400);
    CHECK(c.Get("/patches?dataset=relative")->status == 400);
    CHECK(c.Get("/entities")->status == 400);
    CHECK(c.Get("/reports/popular?limit=x")->status == 400);
    CHECK(c.Get("/reports/oldest")->status == 404);
}

TEST_CASE("votes, status, queries and reports") {
    LiveServer live;
    auto c = live.client();
    // Advocate counts 2, 5, 1 on three patches.
    const std::vector<std::pair<std::string, int>> seeds = {{"Ohio", 2}, {"Oregon", 5}, {"Utah", 1}};
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto r = c.Post("/patches", patch_to_json(candidate(seeds[i].first, static_cast<std::int64_t>(i))).dump(),
                        "application/json");
        REQUIRE(r->status == 201);
        for (int a = 1; a < seeds[i].second; ++a) {
            auto v = post_json(c, "/patches/" + std::to_string(i + 1) + "/votes",
                               {{"agent", repo("voter" + std::to_string(a)).str()}, {"position", "advocate"}});
            REQUIRE(v->status == 200);
        }
    }

    auto popular = body_json(c.Get("/reports/popular?limit=10"));
    REQUIRE(popular.size() == 3);
    CHECK(popular[0]["advocates"] == 5);
    CHECK(popular[1]["advocates"] == 2);
    CHECK(popular[2]["advocates"] == 1);
    CHECK(body_json(c.Get("/reports/popular?limit=1")).size() == 1);

    auto ordered = body_json(c.Get("/patches?order=popular"));
    CHECK(ordered[0]["update"]["targetSubject"] == dbp("Oregon").str());
    auto recent = body_json(c.Get("/reports/recent"));
    CHECK(recent[0]["id"] == fixtures::kRepo + "patch/3");  // recency follows provenance, not votes

    auto two = body_json(c.Get("/patches?minAdvocates=2&order=popular"));
    CHECK(two.size() == 2);
    auto page = body_json(c.Get("/patches?order=popular&limit=1&offset=1"));
    REQUIRE(page.size() == 1);
    CHECK(page[0]["update"]["targetSubject"] == dbp("Ohio").str());
    httplib::Params by_subject{{"subject", dbp("Utah").str()}};
    CHECK(body_json(c.Get("/patches", by_subject, {})).size() == 1);
    CHECK(body_json(c.Get("/patches?type=WrongFact")).empty());
    CHECK(body_json(c.Get("/patches?type=WrongFact,MissingFact")).size() == 3);
    httplib::Params by_dataset{{"dataset", fixtures::kDBpediaDataset}};
    CHECK(body_json(c.Get("/patches", by_dataset, {})).size() == 3);

    auto crit = post_json(c, "/patches/2/votes", {{"agent", repo("voter1").str()}, {"position", "criticiser"}});
    REQUIRE(crit->status == 200);
    Patch p2 = patch_from_json(body_json(crit));
    CHECK(p2.advocates.size() == 4);
    CHECK(p2.criticisers == std::set<Iri>{repo("voter1")});

    auto rejected = post_json(c, "/patches/3/status", {{"status", "rejected"}, {"agent", repo("curator").str()}});
    CHECK(patch_from_json(body_json(rejected)).status == PatchStatus::Rejected);
    CHECK(body_json(c.Get("/patches?status=active")).size() == 2);

    httplib::Params entity{{"subject", dbp("Oregon").str()}};
    auto ent = body_json(c.Get("/entities", entity, {}));
    REQUIRE(ent.size() == 1);
    CHECK(ent[0]["id"] == fixtures::kRepo + "patch/2");

    auto groups = post_json(c, "/groups", {{"id", repo("group/languages").str()}, {"label", "Languages"}});
    CHECK(groups->status == 201);
    CHECK(post_json(c, "/groups", {{"id", repo("group/languages").str()}, {"label", "Again"}})->status == 409);
    auto assigned = post_json(c, "/patches/2/groups", {{"group", repo("group/languages").str()}});
    CHECK(assigned->status == 200);
    CHECK(body_json(assigned)["groups"] == Json::array({repo("group/languages").str()}));
    CHECK(post_json(c, "/patches/2/groups", {{"group", repo("group/none").str()}})->status == 404);
}

TEST_CASE("dataset export, registry and snapshot") {
    LiveServer live;
    auto c = live.client();
    CHECK(body_json(c.Get("/datasets")) ==
          Json::array({{{"iri", fixtures::kDBpediaDataset}, {"label", "DBpedia"}}}));
    const std::string path = "/datasets/" + percent_encode(fixtures::kDBpediaDataset) + "/updates";
    auto none = c.Get(path);
    CHECK(none->status == 200);
    CHECK(none->body.empty());

    REQUIRE(c.Post("/patches", kOhioPatch, "text/turtle")->status == 201);
    auto script = c.Get(path + "?minAdvocates=1&dialect=legacy&prefixes=false");
    REQUIRE(script);
    CHECK(script->status == 200);
    CHECK(script->get_header_value("Content-Disposition").find("attachment") != std::string::npos);
    CHECK(script->body == "# <" + fixtures::kRepo + "patch/1>\n" +
                              "INSERT DATA INTO <http://dbpedia.org/> {\n  dbp:Oregon\n     dbo:language dbp:English_language .\n}\n");
    CHECK(c.Get(path + "?minAdvocates=2")->body.empty());
    CHECK(c.Get("/datasets/" + percent_encode("http://example.org/other") + "/updates")->body.empty());
    CHECK(c.Get(path)->body.rfind("PREFIX dbo:", 0) == 0);

    auto snapshot = c.Get("/snapshot.ttl");
    REQUIRE(snapshot);
    CHECK(snapshot->status == 200);
    CHECK(snapshot->get_header_value("Content-Type") == "text/turtle");
    CHECK(patch_from_turtle(snapshot->body) == std::vector<Patch>{minted_ohio()});
}

TEST_CASE("feedback route") {
    LiveServer live;
    auto c = live.client();
    QuestionContext ctx{Triple(Term::iri(dbp("Ohio")), Term::iri(dbo("language")), Term::iri(dbp("English_language"))),
                        {dbp("Oregon"), dbp("Dances_with_Wolves")},
                        Iri(fixtures::kDBpediaDataset),
                        Iri(fixtures::kDBpediaGraph)};
    FeedbackVote vote{FeedbackKind::AlsoAProperty, dbp("Oregon"), repo("Player_25"), fixtures::kOhioTime};
    Json request = {{"context", context_to_json(ctx)}, {"vote", vote_to_json(vote)}, {"serviceAgent", repo("WhoKnows").str()}};

    auto created = post_json(c, "/feedback", request);
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(patch_from_json(body_json(created)["patch"]) == minted_ohio());

    request["vote"]["actor"] = repo("Player_26").str();
    request["vote"].erase("at");
    auto merged = post_json(c, "/feedback", request);
    CHECK(merged->status == 200);
    CHECK(body_json(merged)["patch"]["advocates"].size() == 2);

    request["vote"]["subject"] = dbp("Salem").str();
    auto bad = post_json(c, "/feedback", request);
    CHECK(bad->status == 400);
    CHECK(body_json(bad)["error"] == "InconsistentVote");
    request["vote"]["kind"] = "maybe";
    CHECK(post_json(c, "/feedback", request)->status == 400);
    CHECK(c.Post("/feedback", request.dump(), "text/turtle")->status == 415);
    CHECK(live.server.repository().events().size() == 2);
}

TEST_CASE("CORS") {
    ApiConfig config = test_config();
    config.cors_origins = {"http://ui.example"};
    LiveServer live(config);
    auto c = live.client();

    auto allowed = c.Get("/patches", {{"Origin", "http://ui.example"}});
    CHECK(allowed->get_header_value("Access-Control-Allow-Origin") == "http://ui.example");
    auto other = c.Get("/patches", {{"Origin", "http://evil.example"}});
    CHECK_FALSE(other->has_header("Access-Control-Allow-Origin"));
    auto preflight = c.Options("/patches/1/votes", {{"Origin", "http://ui.example"},
                                                     {"Access-Control-Request-Method", "POST"}});
    REQUIRE(preflight);
    CHECK(preflight->status == 204);
    CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
    CHECK(preflight->get_header_value("Access-Control-Allow-Origin") == "http://ui.example");

    ApiConfig open = test_config();
    open.cors_origins = {"*"};
    LiveServer any(open);
    CHECK(any.client().Get("/patches", {{"Origin", "http://x.example"}})->get_header_value(
              "Access-Control-Allow-Origin") == "*");
}

TEST_CASE("configuration from flags and environment") {
    ApiConfig c;
    set_listen_address(c, "0.0.0.0:9000");
    CHECK(c.host == "0.0.0.0");
    CHECK(c.port == 9000);
    set_listen_address(c, ":9001");
    CHECK(c.host == "0.0.0.0");
    CHECK(c.port == 9001);
    set_listen_address(c, "9002");
    CHECK(c.port == 9002);
    CHECK_THROWS(set_listen_address(c, "host:http"));
    CHECK_THROWS(set_listen_address(c, "host:70000"));

    auto registry = parse_dataset_registry("http://dbpedia.org/void.ttl#DBpedia|DBpedia 3.7 ; http://e.org/d");
    CHECK(registry.size() == 2);
    CHECK(registry.at(Iri("http://dbpedia.org/void.ttl#DBpedia")) == "DBpedia 3.7");
    CHECK(registry.at(Iri("http://e.org/d")) == "http://e.org/d");
    CHECK(parse_origins("http://a, http://b,") == std::vector<std::string>{"http://a", "http://b"});

    ::setenv("PATCHR_LISTEN", "127.0.0.1:8123", 1);
    ::setenv("PATCHR_REPO_BASE", "http://example.org/r/", 1);
    ::setenv("PATCHR_JOURNAL", "/tmp/patchr.jsonl", 1);
    ::setenv("PATCHR_DATASETS", "http://e.org/d|D", 1);
    ::setenv("PATCHR_CORS_ORIGINS", "*", 1);
    ApiConfig e;
    apply_environment(e);
    CHECK(e.host == "127.0.0.1");
    CHECK(e.port == 8123);
    CHECK(e.repo_base == Iri("http://example.org/r/"));
    CHECK(e.journal_path == std::filesystem::path("/tmp/patchr.jsonl"));
    CHECK(e.datasets.size() == 1);
    CHECK(e.cors_origins == std::vector<std::string>{"*"});
    for (const char* name : {"PATCHR_LISTEN", "PATCHR_REPO_BASE", "PATCHR_JOURNAL", "PATCHR_DATASETS",
                             "PATCHR_CORS_ORIGINS"}) {
        ::unsetenv(name);
    }
    ::setenv("PATCHR_REPO_BASE", "not an iri", 1);
    ApiConfig bad;
    CHECK_THROWS_AS(apply_environment(bad), Error);
    ::unsetenv("PATCHR_REPO_BASE");

    CHECK(http_status(ErrorCode::UnknownPatch) == 404);
    CHECK(http_status(ErrorCode::ConflictingPosition) == 409);
    CHECK(http_status(ErrorCode::Validation) == 400);
}

TEST_CASE("journal contract: 2xx mutations are journaled events, replay reproduces state") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("patchr-service-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    ApiConfig config = test_config();
    config.journal_path = dir / "journal.jsonl";

    std::size_t accepted = 0;
    std::string patches_before, snapshot_before;
    std::shared_ptr<const RepositoryState> state_before;
    {
        LiveServer live(config);
        auto c = live.client();
        auto count = [&](const httplib::Result& r) {
            REQUIRE(r);
            if (r->status / 100 == 2) ++accepted;
        };
        count(c.Post("/patches", kOhioPatch, "text/turtle"));
        count(c.Post("/patches", patch_to_json(candidate("Ohio", 5)).dump(), "application/json"));
        count(c.Post("/patches", patch_to_json(candidate("Ohio", 6)).dump(), "application/json"));  // merge, no agent change
        count(c.Post("/patches?agent=" + percent_encode(repo("p9").str()), kOhioPatch, "text/turtle"));
        count(post_json(c, "/patches/2/votes", {{"agent", repo("x").str()}, {"position", "criticiser"}}));
        count(post_json(c, "/patches/2/votes", {{"agent", repo("x").str()}, {"position", "withdrawn"}}));
        count(post_json(c, "/patches/1/status", {{"status", "resolved"}, {"agent", repo("c").str()}}));
        count(post_json(c, "/patches/1/status", {{"status", "active"}, {"agent", repo("c").str()}}));  // 409
        count(post_json(c, "/patches/7/votes", {{"agent", repo("x").str()}, {"position", "advocate"}}));  // 404
        count(c.Post("/patches", "garbage", "text/turtle"));  // 400
        count(post_json(c, "/groups", {{"id", repo("g").str()}, {"label", "G"}}));
        count(post_json(c, "/patches/2/groups", {{"group", repo("g").str()}}));
        CHECK(accepted == 9);
        CHECK(live.server.repository().events().size() == accepted);
        patches_before = c.Get("/patches")->body;
        snapshot_before = c.Get("/snapshot.ttl")->body;
        state_before = live.server.repository().snapshot();
    }
    std::ifstream journal(config.journal_path->string());
    std::size_t lines = 0;
    for (std::string line; std::getline(journal, line);) ++lines;
    CHECK(lines == accepted);

    LiveServer again(config);
    CHECK(*again.server.repository().snapshot() == *state_before);
    auto c = again.client();
    CHECK(c.Get("/patches")->body == patches_before);
    CHECK(c.Get("/snapshot.ttl")->body == snapshot_before);
    fs::remove_all(dir);
}

TEST_CASE("concurrent identical submissions merge into one patch") {
    LiveServer live;
    constexpr int kClients = 8;
    Patch p = candidate("Oregon");
    std::vector<int> statuses(kClients, 0);
    std::vector<std::thread> clients;
    for (int i = 0; i < kClients; ++i) {
        clients.emplace_back([&, i] {
            auto c = live.client();
            auto r = c.Post("/patches?agent=" + percent_encode(repo("agent" + std::to_string(i)).str()),
                            patch_to_json(p).dump(), "application/json");
            statuses[i] = r ? r->status : -1;
        });
    }
    for (auto& t : clients) t.join();
    CHECK(std::count(statuses.begin(), statuses.end(), 201) == 1);
    CHECK(std::count(statuses.begin(), statuses.end(), 200) == kClients - 1);

    auto all = body_json(live.client().Get("/patches"));
    REQUIRE(all.size() == 1);
    CHECK(all[0]["advocates"].size() == kClients);
    CHECK(live.server.repository().events().size() == kClients);
}
