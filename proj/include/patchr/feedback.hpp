#pragma once

#include "patchr/patch.hpp"

#include <set>
#include <string>
#include <vector>

namespace patchr {

// A question generated from one fact. Distractors are subjects that use the
// same property at least once but are not linked to the fact's object.
struct QuestionContext {
    Triple source;
    std::set<Iri> distractors;
    Iri dataset;
    Iri target_graph;

    bool operator==(const QuestionContext&) const = default;
};

enum class FeedbackKind { NotAProperty, AlsoAProperty };

std::string_view to_string(FeedbackKind kind);
std::optional<FeedbackKind> parse_feedback_kind(std::string_view text);  // "notAProperty" | "alsoAProperty"

struct FeedbackVote {
    FeedbackKind kind;
    Iri subject;
    Iri actor;
    Timestamp at;

    bool operator==(const FeedbackVote&) const = default;
};

// Placeholders: {object}, {property}, {subject}.
struct SentenceTemplates {
    std::string not_a_property = "{object} is not the {property} of {subject}.";
    std::string also_a_property = "{object} is also the {property} of {subject}.";
};

struct FeedbackSentence {
    FeedbackKind kind;
    Iri subject;
    std::string text;

    bool operator==(const FeedbackSentence&) const = default;
};

// Display label: IRI local name (after the last '#' or '/'), percent-decoded,
// underscores as spaces. Literals show their lexical form.
std::string display_label(const Term& term);

// Subjects of `graph` using source's predicate but never with source's
// object; the source subject itself is never included.
std::set<Iri> distractor_subjects(const rdf::Graph& graph, const Triple& source);

QuestionContext make_context(const rdf::Graph& graph, const Triple& source, Iri dataset, Iri target_graph);

// Throws Error(InvalidContext) unless the source subject is an IRI, the
// object is not a blank node and the distractors exclude the source subject.
void require_valid_context(const QuestionContext& ctx);

// The NotAProperty sentence for the source subject, then one AlsoAProperty
// sentence per distractor in IRI order.
std::vector<FeedbackSentence> feedback_sentences(const QuestionContext& ctx,
                                                 const SentenceTemplates& templates = {});

// Single-pair deletion (NotAProperty, WrongFact) or insertion (AlsoAProperty,
// MissingFact) at the voted subject. No id. Throws InconsistentVote when the
// subject does not fit the vote kind.
Patch patch_from_feedback(const QuestionContext& ctx, const FeedbackVote& vote, const Iri& service_agent);

}  // namespace patchr
