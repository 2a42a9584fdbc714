#pragma once

// JSON mirror of the domain types. IRIs are plain strings, terms are
// {"type": "iri"|"bnode"|"literal", "value", "datatype"?, "language"?}.
// Decoding throws Error(InvalidJson) or the domain error of a bad value.

#include "patchr/feedback.hpp"
#include "patchr/patch.hpp"
#include "patchr/repository.hpp"

#include <json.hpp>

namespace patchr {

using Json = nlohmann::json;

Json term_to_json(const Term& term);
Term term_from_json(const Json& j);

Json patch_to_json(const Patch& patch);
Patch patch_from_json(const Json& j);

Json group_to_json(const PatchGroup& group);
PatchGroup group_from_json(const Json& j);

Json provenance_to_json(const ProvenanceEvent& ev);
ProvenanceEvent provenance_from_json(const Json& j);

Json summary_to_json(const PatchSummary& summary);

// {"source": {"subject", "predicate", "object"}, "distractors": [...],
//  "dataset", "targetGraph"}; subject/predicate are IRI strings.
Json context_to_json(const QuestionContext& ctx);
QuestionContext context_from_json(const Json& j);

// {"kind": "notAProperty"|"alsoAProperty", "subject", "actor", "at"?}.
// A missing "at" takes `default_at`.
Json vote_to_json(const FeedbackVote& vote);
FeedbackVote vote_from_json(const Json& j, Timestamp default_at);

// Field accessors that turn a missing or mistyped member into InvalidJson.
const Json& require_member(const Json& j, const char* key);
std::string require_string(const Json& j, const char* key);
std::optional<std::string> optional_string(const Json& j, const char* key);

}  // namespace patchr
