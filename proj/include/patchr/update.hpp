#pragma once

#include "patchr/patch.hpp"
#include "patchr/repository.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patchr {

// Legacy is the pre-1.1 `INSERT DATA INTO <g> { ... }` form; Sparql11 wraps
// the triples in `GRAPH <g> { ... }`.
enum class SparqlDialect { Legacy, Sparql11 };

std::string_view to_string(SparqlDialect dialect);
std::optional<SparqlDialect> parse_dialect(std::string_view text);  // "legacy" | "sparql11"

// SPARQL UPDATE for one patch: the DELETE DATA block (if any) before the
// INSERT DATA block, joined by ";\n". Throws ValidationError.
std::string to_sparql(const Patch& patch, SparqlDialect dialect = SparqlDialect::Sparql11,
                      const rdf::PrefixMap& prefixes = rdf::PrefixMap(), bool prefix_header = false);

// Script for every patch query_patches selects, in that order, each preceded
// by a `# <id>` comment and separated by ";\n\n". One PREFIX header covers the
// whole script. Nothing selected yields "".
std::string export_updates(const RepositoryState& state, const PatchFilter& filter,
                           SparqlDialect dialect = SparqlDialect::Sparql11,
                           const rdf::PrefixMap& prefixes = rdf::PrefixMap(), bool prefix_header = true);

struct ApplyReport {
    std::size_t added = 0;
    std::size_t removed = 0;
    // Deletions whose triple was not in the graph (DATA-update semantics: a
    // warning, not an error).
    std::vector<Triple> absent_deletions;

    bool operator==(const ApplyReport&) const = default;
};

// Removes the deletions, then adds the insertions, in place. Throws
// GraphMismatch (leaving the graph untouched) when the graph is named and the
// name differs from the instruction's target graph.
ApplyReport apply_instruction(rdf::Graph& graph, const UpdateInstruction& update);

}  // namespace patchr
