#pragma once

#include "patchr/patch.hpp"
#include "patchr/turtle.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace patchr {

// Adds the RDF description of `patch` to `graph`. Blank nodes are labelled
// with `blank_prefix` so several patches can share one graph.
void add_patch_triples(rdf::Graph& graph, const Patch& patch, const std::string& blank_prefix = "p");

// Turtle description of a patch in the pro:/guo:/prv: vocabulary. A patch
// without an id is written with a blank-node subject. Throws ValidationError
// for invalid patches.
std::string patch_to_turtle(const Patch& patch, const rdf::PrefixMap& prefixes = rdf::PrefixMap());

// One document holding every patch, in the given order.
std::string patches_to_turtle(const std::vector<Patch>& patches,
                              const rdf::PrefixMap& prefixes = rdf::PrefixMap());

// Every subject typed pro:Patch, ordered by id (unminted blank-node patches
// last). Missing status defaults to active; unknown triples are ignored.
// Throws ParseError or StructuralError.
std::vector<Patch> patch_from_turtle(std::string_view document);
std::vector<Patch> patches_from_graph(const rdf::Graph& graph);

}  // namespace patchr
