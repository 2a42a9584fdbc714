#pragma once

#include "patchr/rdf.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace patchr::rdf {

struct ParsedDocument {
    Graph graph;
    PrefixMap prefixes;
};

// Parses the supported Turtle subset: @prefix / @base directives, prefixed
// names, <IRI>s, 'a', ';' and ',' lists, labelled and anonymous blank nodes,
// quoted strings with @lang or ^^datatype, and '#' comments. Blank nodes are
// relabelled b0, b1, ... in order of first appearance.
//
// Throws ParseError (Syntax, UndefinedPrefix or RelativeIri) carrying the
// line, column and offending token. Any input, including invalid UTF-8,
// yields either a document or a ParseError.
ParsedDocument parse_turtle(std::string_view document, const std::optional<std::string>& base = {});

// Deterministic Turtle. Subjects sorted by their canonical N-Triples form,
// predicates and objects sorted within a subject, blank nodes referenced once
// inlined as [ ... ], only used prefixes declared. An empty graph yields "".
std::string serialize_turtle(const Graph& graph, const PrefixMap& prefixes = PrefixMap());

// Renders a term with a prefixed name where the prefix map allows it.
// Records the labels it used in `used` when given.
std::string render_term(const Term& term, const PrefixMap& prefixes,
                        std::set<std::string>* used = nullptr);

}  // namespace patchr::rdf
