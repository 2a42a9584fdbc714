#include "patchr/update.hpp"

#include "patchr/turtle.hpp"

namespace patchr {

std::string_view to_string(SparqlDialect dialect) {
    return dialect == SparqlDialect::Legacy ? "legacy" : "sparql11";
}

std::optional<SparqlDialect> parse_dialect(std::string_view text) {
    if (text == "legacy") return SparqlDialect::Legacy;
    if (text == "sparql11" || text == "sparql1.1") return SparqlDialect::Sparql11;
    return std::nullopt;
}

namespace {

// One statement group per triple, laid out as:
//   subject
//      predicate object .
std::string block(const char* verb, const UpdateInstruction& u, const std::set<PredicateObject>& pairs,
                  SparqlDialect dialect, const rdf::PrefixMap& prefixes, std::set<std::string>& used) {
    const std::string graph = "<" + u.target_graph.str() + ">";
    const std::string indent = dialect == SparqlDialect::Legacy ? "  " : "    ";
    const std::string subject = rdf::render_term(Term::iri(u.target_subject), prefixes, &used);

    std::string out = std::string(verb) + " DATA ";
    if (dialect == SparqlDialect::Legacy) {
        out += std::string(verb[0] == 'I' ? "INTO " : "FROM ") + graph + " {\n";
    } else {
        out += "{\n  GRAPH " + graph + " {\n";
    }
    for (const auto& po : pairs) {
        out += indent + subject + "\n";
        out += indent + "   " + rdf::render_term(Term::iri(po.predicate), prefixes, &used) + " " +
               rdf::render_term(po.object, prefixes, &used) + " .\n";
    }
    out += dialect == SparqlDialect::Legacy ? "}" : "  }\n}";
    return out;
}

std::string body(const Patch& patch, SparqlDialect dialect, const rdf::PrefixMap& prefixes,
                 std::set<std::string>& used) {
    require_valid(patch);
    std::string out;
    if (!patch.update.deletions.empty()) out += block("DELETE", patch.update, patch.update.deletions, dialect, prefixes, used);
    if (!patch.update.insertions.empty()) {
        if (!out.empty()) out += " ;\n";
        out += block("INSERT", patch.update, patch.update.insertions, dialect, prefixes, used);
    }
    return out;
}

std::string header(const rdf::PrefixMap& prefixes, const std::set<std::string>& used) {
    std::string out;
    for (const std::string& label : used) out += "PREFIX " + label + ": <" + *prefixes.find(label) + ">\n";
    if (!out.empty()) out += "\n";
    return out;
}

}  // namespace

std::string to_sparql(const Patch& patch, SparqlDialect dialect, const rdf::PrefixMap& prefixes, bool prefix_header) {
    std::set<std::string> used;
    std::string text = body(patch, dialect, prefixes, used) + "\n";
    return prefix_header ? header(prefixes, used) + text : text;
}

std::string export_updates(const RepositoryState& state, const PatchFilter& filter, SparqlDialect dialect,
                           const rdf::PrefixMap& prefixes, bool prefix_header) {
    std::set<std::string> used;
    std::string script;
    for (const PatchPtr& p : query_patches(state, filter)) {
        if (!script.empty()) script += " ;\n\n";
        script += "# <" + p->id->str() + ">\n" + body(*p, dialect, prefixes, used);
    }
    if (script.empty()) return "";
    script += "\n";
    return prefix_header ? header(prefixes, used) + script : script;
}

ApplyReport apply_instruction(rdf::Graph& graph, const UpdateInstruction& update) {
    if (graph.name() && *graph.name() != update.target_graph) {
        throw Error(ErrorCode::GraphMismatch, "instruction targets <" + update.target_graph.str() +
                                                  "> but the graph is <" + graph.name()->str() + ">");
    }
    ApplyReport report;
    for (const Triple& t : update.delete_triples()) {
        if (graph.erase(t)) {
            ++report.removed;
        } else {
            report.absent_deletions.push_back(t);
        }
    }
    for (const Triple& t : update.insert_triples()) {
        if (graph.insert(t)) ++report.added;
    }
    return report;
}

}  // namespace patchr
