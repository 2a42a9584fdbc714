#include "patchr/service.hpp"

#include "patchr/feedback.hpp"
#include "patchr/json_codec.hpp"
#include "patchr/patch_turtle.hpp"
#include "patchr/update.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <stdexcept>

namespace patchr {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        std::string part = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!part.empty()) out.push_back(std::move(part));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

std::optional<std::size_t> to_size(std::string_view text) {
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

}  // namespace

void set_listen_address(ApiConfig& config, const std::string& address) {
    auto colon = address.rfind(':');
    std::string host = colon == std::string::npos ? "" : address.substr(0, colon);
    std::string port = colon == std::string::npos ? address : address.substr(colon + 1);
    auto n = to_size(port);
    if (!n || *n > 65535) throw std::invalid_argument("bad listen address '" + address + "'");
    if (!host.empty()) config.host = host;
    config.port = static_cast<int>(*n);
}

std::map<Iri, std::string> parse_dataset_registry(const std::string& text) {
    std::map<Iri, std::string> out;
    for (const std::string& entry : split(text, ';')) {
        auto bar = entry.find('|');
        Iri iri(trim(entry.substr(0, bar)));
        out[iri] = bar == std::string::npos ? iri.str() : trim(entry.substr(bar + 1));
    }
    return out;
}

std::vector<std::string> parse_origins(const std::string& text) { return split(text, ','); }

void apply_environment(ApiConfig& config) {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        return v && *v ? std::optional<std::string>(v) : std::nullopt;
    };
    if (auto v = env("PATCHR_LISTEN")) set_listen_address(config, *v);
    if (auto v = env("PATCHR_REPO_BASE")) config.repo_base = Iri(*v);
    if (auto v = env("PATCHR_JOURNAL")) config.journal_path = *v;
    if (auto v = env("PATCHR_DATASETS")) config.datasets = parse_dataset_registry(*v);
    if (auto v = env("PATCHR_CORS_ORIGINS")) config.cors_origins = parse_origins(*v);
}

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownPatch:
    case ErrorCode::UnknownGroup: return 404;
    case ErrorCode::TerminalPatch:
    case ErrorCode::IllegalTransition:
    case ErrorCode::ConflictingPosition:
    case ErrorCode::DuplicateGroup: return 409;
    case ErrorCode::CorruptJournal:
    case ErrorCode::JournalIo:
    case ErrorCode::JournalLocked: return 500;
    default: return 400;
    }
}

namespace {

using httplib::Request;
using httplib::Response;

constexpr const char* kJson = "application/json";
constexpr const char* kTurtle = "text/turtle";
constexpr const char* kSparqlUpdate = "application/sparql-update";

// Raised for a request body in a media type the route does not take.
struct UnsupportedMediaType : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string media_type(const Request& req) {
    std::string type = req.get_header_value("Content-Type");
    type = trim(type.substr(0, type.find(';')));
    std::transform(type.begin(), type.end(), type.begin(), [](unsigned char c) { return std::tolower(c); });
    return type;
}

bool is_json(const std::string& type) { return type == kJson || (type.size() > 5 && type.ends_with("+json")); }
bool is_turtle(const std::string& type) { return type == kTurtle || type == "application/x-turtle"; }

Json json_body(const Request& req) {
    if (!is_json(media_type(req))) throw UnsupportedMediaType("expected " + std::string(kJson));
    return Json::parse(req.body);
}

bool wants_turtle(const Request& req) {
    if (req.has_param("format")) return req.get_param_value("format") == "turtle";
    std::string accept = req.get_header_value("Accept");
    auto turtle = accept.find(kTurtle);
    if (turtle == std::string::npos) return false;
    auto json = accept.find(kJson);
    return json == std::string::npos || turtle < json;
}

void send_json(Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(Response& res, int status, std::string_view code, const std::string& message, Json extra = {}) {
    Json body = {{"error", code}, {"message", message}};
    if (extra.is_object()) body.update(extra);
    send_json(res, body, status);
}

void send_exception(Response& res, std::exception_ptr ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const UnsupportedMediaType& e) {
        send_error(res, 415, "UnsupportedMediaType", e.what());
    } catch (const ValidationError& e) {
        Json codes = Json::array();
        for (const auto& v : e.violations()) codes.push_back(to_string(v.code));
        send_error(res, 400, to_string(e.code()), e.what(), {{"violations", codes}});
    } catch (const StructuralError& e) {
        send_error(res, 400, to_string(e.code()), e.what(), {{"kind", e.kind()}});
    } catch (const ParseError& e) {
        send_error(res, 400, to_string(e.code()), e.what(), {{"line", e.line()}, {"column", e.column()}});
    } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const Json::exception& e) {
        send_error(res, 400, to_string(ErrorCode::InvalidJson), e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
    } catch (...) {
        send_error(res, 500, "Internal", "unknown error");
    }
}

std::optional<std::string> param(const Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

std::size_t size_param(const std::string& name, const std::string& value) {
    auto n = to_size(value);
    if (!n) throw Error(ErrorCode::InvalidFilter, name + " must be a non-negative integer");
    return *n;
}

SparqlDialect dialect_param(const Request& req) {
    auto text = param(req, "dialect");
    if (!text) return SparqlDialect::Sparql11;
    auto d = parse_dialect(*text);
    if (!d) throw Error(ErrorCode::InvalidFilter, "unknown dialect '" + *text + "'");
    return *d;
}

bool flag_param(const Request& req, const char* name, bool fallback) {
    auto text = param(req, name);
    if (!text) return fallback;
    return *text == "true" || *text == "1" || *text == "yes";
}

PatchFilter filter_from(const Request& req) {
    PatchFilter f;
    if (auto v = param(req, "dataset")) f.dataset = Iri(*v);
    if (auto v = param(req, "status")) {
        f.status = parse_status(*v);
        if (!f.status) throw Error(ErrorCode::InvalidFilter, "unknown status '" + *v + "'");
    }
    for (std::size_t i = 0, n = req.get_param_value_count("type"); i < n; ++i) {
        if (!f.types) f.types.emplace();
        for (const std::string& t : split(req.get_param_value("type", i), ',')) f.types->insert(PatchType::parse(t));
    }
    if (auto v = param(req, "minAdvocates")) f.min_advocates = size_param("minAdvocates", *v);
    if (auto v = param(req, "subject")) f.target_subject = Iri(*v);
    if (auto v = param(req, "order")) {
        auto order = parse_order(*v);
        if (!order) throw Error(ErrorCode::InvalidFilter, "order must be recent or popular");
        f.order = *order;
    }
    if (auto v = param(req, "limit")) f.limit = size_param("limit", *v);
    if (auto v = param(req, "offset")) f.offset = size_param("offset", *v);
    return f;
}

Json patch_list(const std::vector<PatchPtr>& patches) {
    Json out = Json::array();
    for (const PatchPtr& p : patches) out.push_back(patch_to_json(*p));
    return out;
}

void send_patches(const Request& req, Response& res, const std::vector<PatchPtr>& patches) {
    if (wants_turtle(req)) {
        std::vector<Patch> copies;
        for (const PatchPtr& p : patches) copies.push_back(*p);
        res.set_content(patches_to_turtle(copies), kTurtle);
    } else {
        send_json(res, patch_list(patches));
    }
}

}  // namespace

struct ApiServer::Impl {
    explicit Impl(ApiConfig c) : config(std::move(c)), repo(config.repo_base, config.journal_path) { routes(); }

    ApiConfig config;
    Repository repo;
    httplib::Server server;
    int port = 0;

    // Numeric ids name minted patches; anything else must be the full IRI.
    Iri patch_id(const std::string& segment) const {
        if (auto n = to_size(segment); n && *n > 0) return repo.snapshot()->mint_id(*n);
        if (!rdf::is_absolute_iri(segment)) throw Error(ErrorCode::UnknownPatch, "no patch " + segment);
        return Iri(segment);
    }

    void send_submission(Response& res, const Repository::SubmitResult& r) {
        res.set_header("Location", r.patch_id.str());
        send_json(res,
                  {{"id", r.patch_id.str()},
                   {"merged", r.merged},
                   {"patch", patch_to_json(repo.snapshot()->get(r.patch_id))}},
                  r.merged ? 200 : 201);
    }

    void submit(const Request& req, Response& res) {
        std::string type = media_type(req);
        Patch candidate = [&] {
            if (is_turtle(type)) {
                auto patches = patch_from_turtle(req.body);
                if (patches.size() != 1) {
                    throw StructuralError(patches.empty() ? "MissingPatch" : "MultiplePatches", "",
                                          "expected exactly one pro:Patch, found " + std::to_string(patches.size()));
                }
                return patches.front();
            }
            if (is_json(type)) return patch_from_json(Json::parse(req.body));
            throw UnsupportedMediaType("patches are submitted as text/turtle or application/json");
        }();
        std::optional<Iri> agent;
        if (auto a = param(req, "agent")) agent = Iri(*a);
        send_submission(res, repo.submit(candidate, resolve_submitter(candidate, agent)));
    }

    void feedback(const Request& req, Response& res) {
        Json body = json_body(req);
        QuestionContext ctx = context_from_json(require_member(body, "context"));
        FeedbackVote vote = vote_from_json(require_member(body, "vote"), Timestamp::now());
        Patch p = patch_from_feedback(ctx, vote, Iri(require_string(body, "serviceAgent")));
        send_submission(res, repo.submit(p, vote.actor));
    }

    void cors(const Request& req, Response& res) const {
        std::string origin = req.get_header_value("Origin");
        if (origin.empty() || config.cors_origins.empty()) return;
        bool any = std::find(config.cors_origins.begin(), config.cors_origins.end(), "*") != config.cors_origins.end();
        if (!any && std::find(config.cors_origins.begin(), config.cors_origins.end(), origin) == config.cors_origins.end()) {
            return;
        }
        res.set_header("Access-Control-Allow-Origin", any ? "*" : origin);
        if (!any) res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Expose-Headers", "Location");
    }

    void routes() {
        server.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) { send_exception(res, ep); });
        server.set_post_routing_handler([this](const Request& req, Response& res) { cors(req, res); });
        server.Options(R"(.*)", [](const Request&, Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, Accept");
            res.set_header("Access-Control-Max-Age", "600");
        });

        server.Post("/patches", [this](const Request& req, Response& res) { submit(req, res); });
        server.Get("/patches", [this](const Request& req, Response& res) {
            send_patches(req, res, query_patches(*repo.snapshot(), filter_from(req)));
        });
        server.Post(R"(/patches/(.+)/votes)", [this](const Request& req, Response& res) {
            Iri id = patch_id(req.matches[1]);
            Json body = json_body(req);
            std::string position = require_string(body, "position");
            auto pos = parse_position(position);
            if (!pos) throw Error(ErrorCode::InvalidJson, "position must be advocate, criticiser or withdrawn");
            repo.vote(id, Iri(require_string(body, "agent")), *pos);
            send_json(res, patch_to_json(repo.snapshot()->get(id)));
        });
        server.Post(R"(/patches/(.+)/status)", [this](const Request& req, Response& res) {
            Iri id = patch_id(req.matches[1]);
            Json body = json_body(req);
            std::string text = require_string(body, "status");
            auto status = parse_status(text);
            if (!status) throw Error(ErrorCode::InvalidJson, "unknown status '" + text + "'");
            repo.set_status(id, *status, Iri(require_string(body, "agent")));
            send_json(res, patch_to_json(repo.snapshot()->get(id)));
        });
        server.Post(R"(/patches/(.+)/groups)", [this](const Request& req, Response& res) {
            Iri id = patch_id(req.matches[1]);
            repo.assign_group(id, Iri(require_string(json_body(req), "group")));
            send_json(res, patch_to_json(repo.snapshot()->get(id)));
        });
        server.Get(R"(/patches/(.+)/sparql)", [this](const Request& req, Response& res) {
            auto snap = repo.snapshot();
            const Patch& p = snap->get(patch_id(req.matches[1]));
            res.set_content(to_sparql(p, dialect_param(req), rdf::PrefixMap(), flag_param(req, "prefixes", false)),
                            kSparqlUpdate);
        });
        server.Get(R"(/patches/(.+))", [this](const Request& req, Response& res) {
            auto snap = repo.snapshot();
            const Patch& p = snap->get(patch_id(req.matches[1]));
            if (wants_turtle(req)) {
                res.set_content(patch_to_turtle(p), kTurtle);
            } else {
                send_json(res, patch_to_json(p));
            }
        });

        server.Post("/groups", [this](const Request& req, Response& res) {
            PatchGroup g = group_from_json(json_body(req));
            repo.create_group(g);
            res.set_header("Location", g.id.str());
            send_json(res, group_to_json(g), 201);
        });

        server.Get("/datasets", [this](const Request&, Response& res) {
            Json out = Json::array();
            for (const auto& [iri, label] : config.datasets) out.push_back({{"iri", iri.str()}, {"label", label}});
            send_json(res, out);
        });
        server.Get(R"(/datasets/(.+)/updates)", [this](const Request& req, Response& res) {
            PatchFilter f = filter_from(req);
            f.dataset = Iri(req.matches[1]);
            std::string script =
                export_updates(*repo.snapshot(), f, dialect_param(req), rdf::PrefixMap(), flag_param(req, "prefixes", true));
            res.set_header("Content-Disposition", "attachment; filename=\"updates.rq\"");
            res.set_content(script, kSparqlUpdate);
        });

        server.Get(R"(/reports/(recent|popular))", [this](const Request& req, Response& res) {
            std::size_t limit = 10;
            if (auto v = param(req, "limit")) limit = size_param("limit", *v);
            Json out = Json::array();
            for (const PatchSummary& s : report(*repo.snapshot(), *parse_order(req.matches[1].str()), limit)) {
                out.push_back(summary_to_json(s));
            }
            send_json(res, out);
        });
        server.Get("/entities", [this](const Request& req, Response& res) {
            auto subject = param(req, "subject");
            if (!subject) throw Error(ErrorCode::InvalidFilter, "subject is required");
            send_patches(req, res, entity_report(*repo.snapshot(), Iri(*subject)));
        });
        server.Get("/snapshot.ttl", [this](const Request&, Response& res) {
            // The snapshot is immutable, so writers carry on while it streams.
            auto body = std::make_shared<const std::string>(snapshot_turtle(*repo.snapshot()));
            res.set_content_provider(body->size(), kTurtle,
                                     [body](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                                         return sink.write(body->data() + offset, std::min<std::size_t>(length, 1 << 16));
                                     });
        });

        server.Post("/feedback", [this](const Request& req, Response& res) { feedback(req, res); });
    }
};

ApiServer::ApiServer(ApiConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
    auto& s = impl_->server;
    const ApiConfig& c = impl_->config;
    int port = c.port == 0 ? s.bind_to_any_port(c.host) : (s.bind_to_port(c.host, c.port) ? c.port : -1);
    if (port < 0) throw std::runtime_error("cannot listen on " + c.host + ":" + std::to_string(c.port));
    impl_->port = port;
    return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }
void ApiServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}
void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

Repository& ApiServer::repository() { return impl_->repo; }
const ApiConfig& ApiServer::config() const { return impl_->config; }

}  // namespace patchr
