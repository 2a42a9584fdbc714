#include "patchr/feedback.hpp"

namespace patchr {

std::string_view to_string(FeedbackKind kind) {
    return kind == FeedbackKind::NotAProperty ? "notAProperty" : "alsoAProperty";
}

std::optional<FeedbackKind> parse_feedback_kind(std::string_view text) {
    if (text == "notAProperty") return FeedbackKind::NotAProperty;
    if (text == "alsoAProperty") return FeedbackKind::AlsoAProperty;
    return std::nullopt;
}

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void replace_all(std::string& text, std::string_view placeholder, const std::string& value) {
    for (auto pos = text.find(placeholder); pos != std::string::npos;
         pos = text.find(placeholder, pos + value.size())) {
        text.replace(pos, placeholder.size(), value);
    }
}

}  // namespace

std::string display_label(const Term& term) {
    if (!term.is_iri()) return term.value();
    const std::string& iri = term.value();
    auto cut = iri.find_last_of("#/");
    if (cut == std::string::npos || cut + 1 == iri.size()) cut = iri.find(':');
    std::string_view local = std::string_view(iri).substr(cut + 1);
    if (local.empty()) return iri;

    std::string out;
    for (std::size_t i = 0; i < local.size(); ++i) {
        if (local[i] == '%' && i + 2 < local.size() && hex_value(local[i + 1]) >= 0 &&
            hex_value(local[i + 2]) >= 0) {
            out += static_cast<char>(hex_value(local[i + 1]) * 16 + hex_value(local[i + 2]));
            i += 2;
        } else {
            out += local[i] == '_' ? ' ' : local[i];
        }
    }
    return out;
}

std::set<Iri> distractor_subjects(const rdf::Graph& graph, const Triple& source) {
    std::set<Iri> out;
    for (const Triple& t : graph.match(std::nullopt, source.predicate, std::nullopt)) {
        if (!t.subject.is_iri() || t.subject == source.subject) continue;
        if (graph.contains(Triple(t.subject, source.predicate, source.object))) continue;
        out.insert(t.subject.as_iri());
    }
    return out;
}

QuestionContext make_context(const rdf::Graph& graph, const Triple& source, Iri dataset, Iri target_graph) {
    QuestionContext ctx{source, distractor_subjects(graph, source), std::move(dataset), std::move(target_graph)};
    require_valid_context(ctx);
    return ctx;
}

void require_valid_context(const QuestionContext& ctx) {
    if (!ctx.source.subject.is_iri()) {
        throw Error(ErrorCode::InvalidContext, "question subject must be an IRI");
    }
    if (ctx.source.object.is_blank()) {
        throw Error(ErrorCode::InvalidContext, "question object must not be a blank node");
    }
    if (ctx.distractors.contains(ctx.source.subject.as_iri())) {
        throw Error(ErrorCode::InvalidContext, "distractors include the question subject <" +
                                                   ctx.source.subject.value() + ">");
    }
}

std::vector<FeedbackSentence> feedback_sentences(const QuestionContext& ctx, const SentenceTemplates& templates) {
    require_valid_context(ctx);
    const std::string object = display_label(ctx.source.object);
    const std::string property = display_label(ctx.source.predicate);
    auto render = [&](const std::string& pattern, const Iri& subject) {
        std::string text = pattern;
        replace_all(text, "{object}", object);
        replace_all(text, "{property}", property);
        replace_all(text, "{subject}", display_label(Term::iri(subject)));
        return text;
    };

    std::vector<FeedbackSentence> out;
    const Iri source = ctx.source.subject.as_iri();
    out.push_back({FeedbackKind::NotAProperty, source, render(templates.not_a_property, source)});
    for (const Iri& d : ctx.distractors) {
        out.push_back({FeedbackKind::AlsoAProperty, d, render(templates.also_a_property, d)});
    }
    return out;
}

Patch patch_from_feedback(const QuestionContext& ctx, const FeedbackVote& vote, const Iri& service_agent) {
    require_valid_context(ctx);
    const bool deletion = vote.kind == FeedbackKind::NotAProperty;
    if (deletion ? vote.subject != ctx.source.subject.as_iri() : !ctx.distractors.contains(vote.subject)) {
        throw Error(ErrorCode::InconsistentVote,
                    "<" + vote.subject.str() + "> is not " +
                        (deletion ? "the question subject" : "a distractor of the question"));
    }

    PredicateObject po{ctx.source.predicate.as_iri(), ctx.source.object};
    Patch p{
        .id = std::nullopt,
        .update = UpdateInstruction{ctx.target_graph, vote.subject, {}, {}},
        .dataset = ctx.dataset,
        .types = {deletion ? PatchType::wrong_fact() : PatchType::missing_fact()},
        .status = PatchStatus::Active,
        .advocates = {vote.actor},
        .criticisers = {},
        .groups = {},
        .comment = std::nullopt,
        .provenance = {ProvenanceEvent{service_agent, vote.actor, vote.at}},
    };
    (deletion ? p.update.deletions : p.update.insertions).insert(po);
    require_valid(p);
    return p;
}

}  // namespace patchr
