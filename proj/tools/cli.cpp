#include "patchr/cli.hpp"

#include "patchr/json_codec.hpp"
#include "patchr/patch_turtle.hpp"
#include "patchr/repository.hpp"
#include "patchr/service.hpp"
#include "patchr/update.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <pthread.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace patchr {

namespace {

namespace fs = std::filesystem;

// Carries the exit code out of a command.
struct Failure {
    int code;
    std::string message;
};

constexpr int kInvalid = 1;
constexpr int kIo = 2;

std::string read_input(const std::string& path, std::istream& in) {
    if (path == "-") return std::string(std::istreambuf_iterator<char>(in), {});
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Failure{kIo, "cannot read " + path};
    std::ostringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

// Writes through a temporary file so readers never see a partial document.
void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
        file << text;
        if (!file.flush()) throw Failure{kIo, "cannot write " + path};
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Failure{kIo, "cannot write " + path + ": " + ec.message()};
}

bool looks_like_json(const std::string& path, const std::string& text) {
    if (path.ends_with(".json")) return true;
    auto first = text.find_first_not_of(" \t\r\n");
    return first != std::string::npos && (text[first] == '{' || text[first] == '[');
}

std::vector<Patch> read_patches(const std::string& path, std::istream& in) {
    std::string text = read_input(path, in);
    if (!looks_like_json(path, text)) return patch_from_turtle(text);
    Json j = Json::parse(text);
    std::vector<Patch> out;
    if (j.is_array()) {
        for (const Json& p : j) out.push_back(patch_from_json(p));
    } else {
        out.push_back(patch_from_json(j));
    }
    return out;
}

// --- repository access: a local journal or a remote endpoint ----------------

struct RepoOptions {
    std::string journal;
    std::string repo_base;
    std::string endpoint;
    std::string agent;
};

void add_repo_options(CLI::App* cmd, RepoOptions& o) {
    cmd->add_option("--journal", o.journal, "Local journal file (exclusive lock)")->envname("PATCHR_JOURNAL");
    cmd->add_option("--repo-base", o.repo_base, "Base IRI for minted patch ids")->envname("PATCHR_REPO_BASE");
    cmd->add_option("--endpoint", o.endpoint, "Service URL, e.g. http://localhost:8080")->envname("PATCHR_ENDPOINT");
}

struct FilterOptions {
    std::string dataset, status, subject, order = "recent";
    std::vector<std::string> types;
    std::optional<std::size_t> min_advocates, limit;
    std::size_t offset = 0;

    PatchFilter filter() const {
        PatchFilter f;
        if (!dataset.empty()) f.dataset = Iri(dataset);
        if (!status.empty()) {
            f.status = parse_status(status);
            if (!f.status) throw Failure{kInvalid, "unknown status '" + status + "'"};
        }
        if (!types.empty()) {
            f.types.emplace();
            for (const auto& t : types) f.types->insert(PatchType::parse(t));
        }
        f.min_advocates = min_advocates;
        if (!subject.empty()) f.target_subject = Iri(subject);
        auto o = parse_order(order);
        if (!o) throw Failure{kInvalid, "order must be recent or popular"};
        f.order = *o;
        f.limit = limit;
        f.offset = offset;
        return f;
    }

    httplib::Params params() const {
        httplib::Params p;
        if (!dataset.empty()) p.emplace("dataset", dataset);
        if (!status.empty()) p.emplace("status", status);
        for (const auto& t : types) p.emplace("type", t);
        if (min_advocates) p.emplace("minAdvocates", std::to_string(*min_advocates));
        if (!subject.empty()) p.emplace("subject", subject);
        p.emplace("order", order);
        if (limit) p.emplace("limit", std::to_string(*limit));
        if (offset) p.emplace("offset", std::to_string(offset));
        return p;
    }
};

void add_filter_options(CLI::App* cmd, FilterOptions& f) {
    cmd->add_option("--dataset", f.dataset, "Dataset IRI");
    cmd->add_option("--status", f.status, "active, resolved or rejected");
    cmd->add_option("--type", f.types, "Patch type (short name or IRI); repeatable");
    cmd->add_option("--min-advocates", f.min_advocates, "Minimum advocate count");
    cmd->add_option("--subject", f.subject, "Target subject IRI");
    cmd->add_option("--order", f.order, "recent or popular")->check(CLI::IsMember({"recent", "popular"}));
    cmd->add_option("--limit", f.limit, "Maximum number of patches")->check(CLI::PositiveNumber);
    cmd->add_option("--offset", f.offset, "Patches to skip");
}

class Remote {
public:
    explicit Remote(const std::string& url) : client_(host_of(url)), prefix_(path_of(url)) {
        client_.set_connection_timeout(5);
        client_.set_read_timeout(60);
    }

    std::string get(const std::string& path, const httplib::Params& params = {},
                    const httplib::Headers& headers = {}) {
        return check(client_.Get(prefix_ + path, params, headers));
    }

    std::string post(const std::string& path, const std::string& body, const std::string& type) {
        return check(client_.Post(prefix_ + path, body, type));
    }

    static std::string encode(const std::string& s) {
        static const char* hex = "0123456789ABCDEF";
        std::string out;
        for (unsigned char c : s) {
            if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
                out += static_cast<char>(c);
            } else {
                out += {'%', hex[c >> 4], hex[c & 15]};
            }
        }
        return out;
    }

private:
    static std::string host_of(const std::string& url) {
        if (url.rfind("http://", 0) != 0) throw Failure{kIo, "only http:// endpoints are supported: " + url};
        auto slash = url.find('/', 7);
        return slash == std::string::npos ? url : url.substr(0, slash);
    }
    static std::string path_of(const std::string& url) {
        auto slash = url.find('/', 7);
        if (slash == std::string::npos) return "";
        std::string p = url.substr(slash);
        while (!p.empty() && p.back() == '/') p.pop_back();
        return p;
    }

    std::string check(const httplib::Result& r) {
        if (!r) throw Failure{kIo, "endpoint unreachable: " + httplib::to_string(r.error())};
        if (r->status / 100 == 2) return r->body;
        std::string message = "HTTP " + std::to_string(r->status);
        try {
            Json j = Json::parse(r->body);
            message += " " + j.value("error", std::string()) + ": " + j.value("message", std::string());
            if (j.contains("violations")) {
                for (const Json& v : j["violations"]) message += "\n  " + v.get<std::string>();
            }
        } catch (const Json::exception&) {
            message += " " + r->body;
        }
        throw Failure{r->status >= 500 ? kIo : kInvalid, message};
    }

    httplib::Client client_;
    std::string prefix_;
};

struct Backend {
    std::unique_ptr<Repository> local;
    std::unique_ptr<Remote> remote;
};

// The base a journal's patch ids were minted under (<base>patch/<n>), so
// local commands need no --repo-base for an existing journal.
std::optional<std::string> journal_base(const fs::path& path) {
    std::ifstream file(path);
    for (std::string line; std::getline(file, line);) {
        RepositoryEvent e = event_from_json_line(line);
        const auto* s = std::get_if<PatchSubmitted>(&e.payload);
        if (!s || s->merged || !s->patch_id) continue;
        const std::string& id = s->patch_id->str();
        auto cut = id.rfind("patch/");
        if (cut != std::string::npos) return id.substr(0, cut);
        return std::nullopt;
    }
    return std::nullopt;
}

Backend open_backend(const RepoOptions& o) {
    Backend b;
    if (!o.endpoint.empty()) {
        b.remote = std::make_unique<Remote>(o.endpoint);
    } else if (!o.journal.empty()) {
        std::string base = o.repo_base;
        if (base.empty()) base = journal_base(o.journal).value_or(ApiConfig().repo_base.str());
        b.local = std::make_unique<Repository>(Iri(base), fs::path(o.journal));
    } else {
        throw Failure{kIo, "no repository: give --journal or --endpoint"};
    }
    return b;
}

std::vector<Patch> fetch_patches(Backend& b, const FilterOptions& f) {
    std::vector<Patch> out;
    if (b.local) {
        for (const PatchPtr& p : query_patches(*b.local->snapshot(), f.filter())) out.push_back(*p);
    } else {
        f.filter();  // same validation as local mode
        for (const Json& j : Json::parse(b.remote->get("/patches", f.params()))) out.push_back(patch_from_json(j));
    }
    return out;
}

// --- output ----------------------------------------------------------------

std::string table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        width.resize(std::max(width.size(), row.size()));
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += row[i];
            if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
        }
        out += line + "\n";
    }
    return out;
}

std::string change_summary(const Patch& p) {
    const rdf::PrefixMap prefixes;
    std::string subject = rdf::render_term(Term::iri(p.update.target_subject), prefixes);
    std::string out;
    auto add = [&](char sign, const std::set<PredicateObject>& pairs) {
        for (const auto& po : pairs) {
            if (!out.empty()) out += "; ";
            out += std::string(1, sign) + " " + subject + " " + rdf::render_term(Term::iri(po.predicate), prefixes) +
                   " " + rdf::render_term(po.object, prefixes);
        }
    };
    add('-', p.update.deletions);
    add('+', p.update.insertions);
    return out;
}

std::string patch_table(const std::vector<Patch>& patches) {
    std::vector<std::vector<std::string>> rows = {{"ID", "STATUS", "ADV", "CRIT", "LATEST", "TYPES", "CHANGE"}};
    for (const Patch& p : patches) {
        std::string types;
        for (const PatchType& t : p.types) types += (types.empty() ? "" : ",") + t.name();
        rows.push_back({p.id ? p.id->str() : "-", std::string(to_string(p.status)), std::to_string(p.advocates.size()),
                        std::to_string(p.criticisers.size()), p.latest_activity().to_rfc3339(), types,
                        change_summary(p)});
    }
    return table(rows);
}

// --- commands --------------------------------------------------------------

int cmd_validate(const std::string& file, std::ostream& out, std::istream& in) {
    bool ok = true;
    for (const Patch& p : read_patches(file, in)) {
        for (const Violation& v : validate_patch(p)) {
            out << to_string(v.code) << "\n";
            ok = false;
        }
    }
    return ok ? 0 : kInvalid;
}

int cmd_submit(const std::string& file, const RepoOptions& o, std::ostream& out, std::istream& in) {
    std::vector<Patch> patches = read_patches(file, in);
    if (patches.empty()) throw Failure{kInvalid, "no pro:Patch in " + file};
    std::optional<Iri> agent;
    if (!o.agent.empty()) agent = Iri(o.agent);
    Backend b = open_backend(o);
    for (const Patch& p : patches) {
        require_valid(p);
        Iri submitter = resolve_submitter(p, agent);
        if (b.local) {
            auto r = b.local->submit(p, submitter);
            out << r.patch_id.str() << (r.merged ? " merged" : " created") << "\n";
        } else {
            Json body = Json::parse(b.remote->post("/patches?agent=" + Remote::encode(submitter.str()),
                                                   patch_to_json(p).dump(), "application/json"));
            out << body["id"].get<std::string>() << (body["merged"].get<bool>() ? " merged" : " created") << "\n";
        }
    }
    return 0;
}

int cmd_query(const RepoOptions& o, const FilterOptions& f, const std::string& format, std::ostream& out) {
    Backend b = open_backend(o);
    std::vector<Patch> patches = fetch_patches(b, f);
    if (format == "json") {
        Json j = Json::array();
        for (const Patch& p : patches) j.push_back(patch_to_json(p));
        out << j.dump(2) << "\n";
    } else if (format == "turtle") {
        out << patches_to_turtle(patches);
    } else {
        out << patch_table(patches);
    }
    return 0;
}

int cmd_export(const RepoOptions& o, const FilterOptions& f, const std::string& dialect_name, bool no_prefixes,
               const std::string& out_file, std::ostream& out) {
    SparqlDialect dialect = *parse_dialect(dialect_name);
    Backend b = open_backend(o);
    std::string script;
    if (b.local) {
        script = export_updates(*b.local->snapshot(), f.filter(), dialect, rdf::PrefixMap(), !no_prefixes);
    } else {
        if (f.dataset.empty()) throw Failure{kInvalid, "remote export needs --dataset"};
        f.filter();
        httplib::Params params = f.params();
        params.emplace("dialect", dialect_name);
        params.emplace("prefixes", no_prefixes ? "false" : "true");
        script = b.remote->get("/datasets/" + Remote::encode(f.dataset) + "/updates", params);
    }
    write_output(out_file, script, out);
    return 0;
}

struct ApplyOptions {
    std::string graph_file;
    std::string patch_file;
    std::string out_file;
    std::string graph_iri;
    bool dry_run = false;
};

int cmd_apply(const ApplyOptions& a, const RepoOptions& o, const FilterOptions& f, std::ostream& out,
              std::istream& in) {
    std::vector<Patch> patches;
    if (!a.patch_file.empty()) {
        patches = read_patches(a.patch_file, in);
        for (const Patch& p : patches) require_valid(p);
    } else {
        Backend b = open_backend(o);
        patches = fetch_patches(b, f);
    }

    rdf::ParsedDocument doc = rdf::parse_turtle(read_input(a.graph_file, in));
    if (!a.graph_iri.empty()) doc.graph.set_name(Iri(a.graph_iri));
    ApplyReport total;
    for (const Patch& p : patches) {
        ApplyReport r = apply_instruction(doc.graph, p.update);
        total.added += r.added;
        total.removed += r.removed;
        total.absent_deletions.insert(total.absent_deletions.end(), r.absent_deletions.begin(),
                                      r.absent_deletions.end());
    }

    out << "added=" << total.added << " removed=" << total.removed << " absent=" << total.absent_deletions.size()
        << "\n";
    for (const Triple& t : total.absent_deletions) out << "absent: " << t.to_ntriples() << "\n";
    if (a.dry_run) return 0;
    std::string target = a.out_file.empty() ? a.graph_file : a.out_file;
    if (target == "-") throw Failure{kInvalid, "give --out when the graph comes from standard input"};
    write_output(target, rdf::serialize_turtle(doc.graph, doc.prefixes), out);
    return 0;
}

int cmd_report(const RepoOptions& o, const std::string& kind, std::size_t limit, const std::string& format,
               std::ostream& out) {
    Backend b = open_backend(o);
    std::vector<PatchSummary> rows;
    if (b.local) {
        rows = report(*b.local->snapshot(), *parse_order(kind), limit);
    } else {
        for (const Json& j : Json::parse(b.remote->get("/reports/" + kind, {{"limit", std::to_string(limit)}}))) {
            rows.push_back({Iri(j.at("id").get<std::string>()), j.at("advocates").get<std::size_t>(),
                            j.at("criticisers").get<std::size_t>(), Timestamp::parse(j.at("latest").get<std::string>())});
        }
    }
    if (format == "json") {
        Json j = Json::array();
        for (const auto& s : rows) j.push_back(summary_to_json(s));
        out << j.dump(2) << "\n";
        return 0;
    }
    std::vector<std::vector<std::string>> t = {{"ID", "ADV", "CRIT", "LATEST"}};
    for (const auto& s : rows) {
        t.push_back({s.id.str(), std::to_string(s.advocates), std::to_string(s.criticisers), s.latest.to_rfc3339()});
    }
    out << table(t);
    return 0;
}

int cmd_serve(ApiConfig config, std::ostream& err) {
    // Signals are taken synchronously by one thread; the server threads
    // inherit the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);

    ApiServer server(std::move(config));
    int port = server.bind();
    err << "listening on http://" << server.config().host << ":" << port << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    return 0;
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::JournalIo:
    case ErrorCode::JournalLocked:
    case ErrorCode::CorruptJournal: return kIo;
    default: return kInvalid;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
    CLI::App app{"Patch request repository for Linked Data", "patchr"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    RepoOptions repo;
    FilterOptions filter;

    ApiConfig serve_config;
    std::string listen, datasets, origins, journal_path, repo_base;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--listen", listen, "host:port (port 0 picks one)")->envname("PATCHR_LISTEN");
    serve->add_option("--repo-base", repo_base, "Base IRI for minted patch ids")->envname("PATCHR_REPO_BASE");
    serve->add_option("--journal", journal_path, "Journal file")->envname("PATCHR_JOURNAL");
    serve->add_option("--datasets", datasets, "Dataset registry: <iri>|<label>;...")->envname("PATCHR_DATASETS");
    serve->add_option("--cors-origins", origins, "Comma-separated allowed origins")->envname("PATCHR_CORS_ORIGINS");

    std::string file;
    auto* submit = app.add_subcommand("submit", "Submit patch documents (Turtle or JSON)");
    submit->add_option("file", file, "Patch file, - for standard input")->required();
    submit->add_option("--agent", repo.agent, "Submitting agent IRI");
    add_repo_options(submit, repo);

    std::string format = "table";
    auto* query = app.add_subcommand("query", "List patches");
    add_filter_options(query, filter);
    add_repo_options(query, repo);
    query->add_option("--output", format, "json, turtle or table")->check(CLI::IsMember({"json", "turtle", "table"}));

    std::string dialect = "sparql11", out_file;
    bool no_prefixes = false;
    auto* exp = app.add_subcommand("export", "SPARQL UPDATE script for the selected patches");
    add_filter_options(exp, filter);
    add_repo_options(exp, repo);
    exp->add_option("--dialect", dialect, "legacy or sparql11")->check(CLI::IsMember({"legacy", "sparql11"}));
    exp->add_option("--out", out_file, "Output file (default standard output)");
    exp->add_flag("--no-prefixes", no_prefixes, "Omit the PREFIX header");

    ApplyOptions apply_opts;
    auto* apply = app.add_subcommand("apply", "Apply patches to a Turtle graph file");
    apply->add_option("--graph", apply_opts.graph_file, "Turtle graph file")->required();
    apply->add_option("--patch", apply_opts.patch_file, "Patch file; otherwise patches selected from the repository");
    apply->add_option("--out", apply_opts.out_file, "Output file (default: rewrite the graph file)");
    apply->add_option("--graph-iri", apply_opts.graph_iri, "Name of the graph; patches for other graphs fail");
    apply->add_flag("--dry-run", apply_opts.dry_run, "Print the report without writing");
    add_filter_options(apply, filter);
    add_repo_options(apply, repo);

    std::string kind;
    std::size_t limit = 10;
    std::string report_format = "table";
    auto* rep = app.add_subcommand("report", "Most recent or most popular patches");
    rep->add_option("kind", kind, "recent or popular")->required()->check(CLI::IsMember({"recent", "popular"}));
    rep->add_option("--limit", limit, "Rows")->check(CLI::PositiveNumber);
    rep->add_option("--output", report_format, "json or table")->check(CLI::IsMember({"json", "table"}));
    add_repo_options(rep, repo);

    auto* validate = app.add_subcommand("validate", "Check patch documents; prints violation codes");
    validate->add_option("file", file, "Patch file, - for standard input")->required();

    std::vector<const char*> argv = {"patchr"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : kIo;
    }

    try {
        if (*serve) {
            apply_environment(serve_config);
            if (!listen.empty()) set_listen_address(serve_config, listen);
            if (!repo_base.empty()) serve_config.repo_base = Iri(repo_base);
            if (!journal_path.empty()) serve_config.journal_path = journal_path;
            if (!datasets.empty()) serve_config.datasets = parse_dataset_registry(datasets);
            if (!origins.empty()) serve_config.cors_origins = parse_origins(origins);
            return cmd_serve(serve_config, err);
        }
        if (*submit) return cmd_submit(file, repo, out, in);
        if (*query) return cmd_query(repo, filter, format, out);
        if (*exp) return cmd_export(repo, filter, dialect, no_prefixes, out_file, out);
        if (*apply) return cmd_apply(apply_opts, repo, filter, out, in);
        if (*rep) return cmd_report(repo, kind, limit, report_format, out);
        if (*validate) return cmd_validate(file, out, in);
    } catch (const Failure& f) {
        err << "patchr: " << f.message << "\n";
        return f.code;
    } catch (const ParseError& e) {
        err << "patchr: " << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return kInvalid;
    } catch (const ValidationError& e) {
        err << "patchr: invalid patch\n";
        for (const auto& v : e.violations()) err << "  " << to_string(v.code) << ": " << v.message << "\n";
        return kInvalid;
    } catch (const Error& e) {
        err << "patchr: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const Json::exception& e) {
        err << "patchr: bad JSON: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "patchr: " << e.what() << "\n";
        return kIo;
    }
    return kIo;
}

}  // namespace patchr
