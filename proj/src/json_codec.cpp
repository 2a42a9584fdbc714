#include "patchr/json_codec.hpp"

namespace patchr {

const Json& require_member(const Json& j, const char* key) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidJson, "expected a JSON object");
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) throw Error(ErrorCode::InvalidJson, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const Json& j, const char* key) {
    const Json& v = require_member(j, key);
    if (!v.is_string()) throw Error(ErrorCode::InvalidJson, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidJson, "expected a JSON object");
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorCode::InvalidJson, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

namespace {

const Json& optional_array(const Json& j, const char* key) {
    static const Json empty = Json::array();
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return empty;
    if (!it->is_array()) throw Error(ErrorCode::InvalidJson, std::string("field '") + key + "' must be an array");
    return *it;
}

std::set<Iri> iri_set(const Json& j, const char* key) {
    std::set<Iri> out;
    for (const Json& v : optional_array(j, key)) {
        if (!v.is_string()) throw Error(ErrorCode::InvalidJson, std::string("'") + key + "' holds a non-string");
        out.insert(Iri(v.get<std::string>()));
    }
    return out;
}

Json iri_array(const std::set<Iri>& iris) {
    Json out = Json::array();
    for (const Iri& i : iris) out.push_back(i.str());
    return out;
}

Json pairs_to_json(const std::set<PredicateObject>& pairs) {
    Json out = Json::array();
    for (const auto& po : pairs) out.push_back({{"predicate", po.predicate.str()}, {"object", term_to_json(po.object)}});
    return out;
}

std::set<PredicateObject> pairs_from_json(const Json& j, const char* key) {
    std::set<PredicateObject> out;
    for (const Json& po : optional_array(j, key)) {
        out.insert(PredicateObject{Iri(require_string(po, "predicate")), term_from_json(require_member(po, "object"))});
    }
    return out;
}

}  // namespace

Json term_to_json(const Term& term) {
    switch (term.kind()) {
    case rdf::TermKind::Iri: return {{"type", "iri"}, {"value", term.value()}};
    case rdf::TermKind::BlankNode: return {{"type", "bnode"}, {"value", term.value()}};
    case rdf::TermKind::Literal: break;
    }
    Json out = {{"type", "literal"}, {"value", term.value()}};
    if (!term.language().empty()) {
        out["language"] = term.language();
    } else if (term.datatype() != rdf::kXsdString) {
        out["datatype"] = term.datatype();
    }
    return out;
}

Term term_from_json(const Json& j) {
    // A bare string is shorthand for an IRI.
    if (j.is_string()) return Term::iri(j.get<std::string>());
    std::string type = require_string(j, "type");
    std::string value = require_string(j, "value");
    if (type == "iri" || type == "uri") return Term::iri(value);
    if (type == "bnode") return Term::blank(value);
    if (type != "literal") throw Error(ErrorCode::InvalidJson, "unknown term type '" + type + "'");
    if (auto lang = optional_string(j, "language")) return Term::lang_literal(value, *lang);
    return Term::literal(value, optional_string(j, "datatype").value_or(rdf::kXsdString));
}

Json provenance_to_json(const ProvenanceEvent& ev) {
    Json out = {{"performedBy", ev.performed_by.str()}, {"performedAt", ev.performed_at.to_rfc3339()}};
    if (ev.involved_actor) out["involvedActor"] = ev.involved_actor->str();
    return out;
}

ProvenanceEvent provenance_from_json(const Json& j) {
    ProvenanceEvent ev{Iri(require_string(j, "performedBy")), std::nullopt,
                       Timestamp::parse(require_string(j, "performedAt"))};
    if (auto actor = optional_string(j, "involvedActor")) ev.involved_actor = Iri(*actor);
    return ev;
}

Json patch_to_json(const Patch& patch) {
    Json types = Json::array();
    for (const PatchType& t : patch.types) types.push_back(t.iri().str());
    Json provenance = Json::array();
    for (const auto& ev : patch.provenance) provenance.push_back(provenance_to_json(ev));

    Json out = {
        {"update",
         {{"targetGraph", patch.update.target_graph.str()},
          {"targetSubject", patch.update.target_subject.str()},
          {"insertions", pairs_to_json(patch.update.insertions)},
          {"deletions", pairs_to_json(patch.update.deletions)}}},
        {"dataset", patch.dataset.str()},
        {"types", types},
        {"status", to_string(patch.status)},
        {"advocates", iri_array(patch.advocates)},
        {"criticisers", iri_array(patch.criticisers)},
        {"groups", iri_array(patch.groups)},
        {"provenance", provenance},
    };
    if (patch.id) out["id"] = patch.id->str();
    if (patch.comment) out["comment"] = *patch.comment;
    return out;
}

Patch patch_from_json(const Json& j) {
    const Json& u = require_member(j, "update");
    Patch patch{
        .id = std::nullopt,
        .update = UpdateInstruction{
            .target_graph = Iri(require_string(u, "targetGraph")),
            .target_subject = Iri(require_string(u, "targetSubject")),
            .insertions = pairs_from_json(u, "insertions"),
            .deletions = pairs_from_json(u, "deletions"),
        },
        .dataset = Iri(require_string(j, "dataset")),
    };
    if (auto id = optional_string(j, "id")) patch.id = Iri(*id);
    for (const Json& t : optional_array(j, "types")) {
        if (!t.is_string()) throw Error(ErrorCode::InvalidJson, "'types' holds a non-string");
        patch.types.insert(PatchType::parse(t.get<std::string>()));
    }
    if (auto status = optional_string(j, "status")) {
        auto parsed = parse_status(*status);
        if (!parsed) throw Error(ErrorCode::InvalidJson, "unknown status '" + *status + "'");
        patch.status = *parsed;
    }
    patch.advocates = iri_set(j, "advocates");
    patch.criticisers = iri_set(j, "criticisers");
    patch.groups = iri_set(j, "groups");
    patch.comment = optional_string(j, "comment");
    for (const Json& ev : optional_array(j, "provenance")) patch.provenance.push_back(provenance_from_json(ev));
    return patch;
}

Json group_to_json(const PatchGroup& group) {
    Json out = {{"id", group.id.str()}, {"label", group.label}};
    if (group.description) out["description"] = *group.description;
    return out;
}

PatchGroup group_from_json(const Json& j) {
    return PatchGroup{Iri(require_string(j, "id")), require_string(j, "label"), optional_string(j, "description")};
}

Json summary_to_json(const PatchSummary& summary) {
    return {{"id", summary.id.str()},
            {"advocates", summary.advocates},
            {"criticisers", summary.criticisers},
            {"latest", summary.latest.to_rfc3339()}};
}

Json context_to_json(const QuestionContext& ctx) {
    return {{"source",
             {{"subject", ctx.source.subject.value()},
              {"predicate", ctx.source.predicate.value()},
              {"object", term_to_json(ctx.source.object)}}},
            {"distractors", iri_array(ctx.distractors)},
            {"dataset", ctx.dataset.str()},
            {"targetGraph", ctx.target_graph.str()}};
}

QuestionContext context_from_json(const Json& j) {
    const Json& src = require_member(j, "source");
    Triple source(Term::iri(require_string(src, "subject")), Term::iri(require_string(src, "predicate")),
                  term_from_json(require_member(src, "object")));
    return QuestionContext{std::move(source), iri_set(j, "distractors"), Iri(require_string(j, "dataset")),
                           Iri(require_string(j, "targetGraph"))};
}

Json vote_to_json(const FeedbackVote& vote) {
    return {{"kind", to_string(vote.kind)},
            {"subject", vote.subject.str()},
            {"actor", vote.actor.str()},
            {"at", vote.at.to_rfc3339()}};
}

FeedbackVote vote_from_json(const Json& j, Timestamp default_at) {
    std::string kind = require_string(j, "kind");
    auto parsed = parse_feedback_kind(kind);
    if (!parsed) throw Error(ErrorCode::InvalidJson, "unknown feedback kind '" + kind + "'");
    auto at = optional_string(j, "at");
    return FeedbackVote{*parsed, Iri(require_string(j, "subject")), Iri(require_string(j, "actor")),
                        at ? Timestamp::parse(*at) : default_at};
}

}  // namespace patchr
