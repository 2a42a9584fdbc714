#include "patchr/patch.hpp"

#include <algorithm>
#include <tuple>

namespace patchr {

namespace {

struct NamedType {
    PatchType::Kind kind;
    const char* name;
};

constexpr NamedType kNamedTypes[] = {
    {PatchType::Kind::WrongFact, "WrongFact"},
    {PatchType::Kind::MissingFact, "MissingFact"},
    {PatchType::Kind::EncodingError, "EncodingError"},
    {PatchType::Kind::DatatypeError, "DatatypeError"},
};

std::vector<Triple> expand(const Iri& subject, const std::set<PredicateObject>& pairs) {
    std::vector<Triple> out;
    out.reserve(pairs.size());
    for (const auto& po : pairs) out.emplace_back(Term::iri(subject), Term::iri(po.predicate), po.object);
    return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += "\n";
        out += lines[i];
    }
    return out;
}

}  // namespace

std::vector<Triple> UpdateInstruction::insert_triples() const { return expand(target_subject, insertions); }
std::vector<Triple> UpdateInstruction::delete_triples() const { return expand(target_subject, deletions); }

bool provenance_before(const ProvenanceEvent& a, const ProvenanceEvent& b) {
    return std::tie(a.performed_at, a.performed_by, a.involved_actor) <
           std::tie(b.performed_at, b.performed_by, b.involved_actor);
}

PatchType PatchType::named(Kind kind) {
    for (const auto& entry : kNamedTypes) {
        if (entry.kind == kind) return PatchType(kind, Iri(std::string(rdf::ns::pro) + entry.name));
    }
    throw Error(ErrorCode::InvalidTerm, "Other patch types need an IRI");
}

PatchType PatchType::from_iri(const Iri& iri) {
    for (const auto& entry : kNamedTypes) {
        if (iri.str() == std::string(rdf::ns::pro) + entry.name) return named(entry.kind);
    }
    return PatchType(Kind::Other, iri);
}

PatchType PatchType::parse(std::string_view text) {
    for (const auto& entry : kNamedTypes) {
        if (text == entry.name) return named(entry.kind);
    }
    return from_iri(Iri(std::string(text)));
}

std::string PatchType::name() const {
    for (const auto& entry : kNamedTypes) {
        if (entry.kind == kind_) return entry.name;
    }
    return iri_.str();
}

std::string_view to_string(PatchStatus status) {
    switch (status) {
    case PatchStatus::Active: return "active";
    case PatchStatus::Resolved: return "resolved";
    case PatchStatus::Rejected: return "rejected";
    }
    return "active";
}

std::optional<PatchStatus> parse_status(std::string_view text) {
    if (text == "active") return PatchStatus::Active;
    if (text == "resolved") return PatchStatus::Resolved;
    if (text == "rejected") return PatchStatus::Rejected;
    return std::nullopt;
}

bool is_terminal(PatchStatus status) { return status != PatchStatus::Active; }

bool can_transition(PatchStatus from, PatchStatus to) {
    return from == PatchStatus::Active && to != PatchStatus::Active;
}

Timestamp Patch::latest_activity() const {
    Timestamp latest;
    for (const auto& ev : provenance) latest = std::max(latest, ev.performed_at);
    return latest;
}

std::string_view to_string(ViolationCode code) {
    switch (code) {
    case ViolationCode::EmptyInstruction: return "EmptyInstruction";
    case ViolationCode::InsertDeleteOverlap: return "InsertDeleteOverlap";
    case ViolationCode::BlankNodeInInstruction: return "BlankNodeInInstruction";
    case ViolationCode::AdvocateCriticiserOverlap: return "AdvocateCriticiserOverlap";
    case ViolationCode::MissingType: return "MissingType";
    case ViolationCode::MissingProvenance: return "MissingProvenance";
    case ViolationCode::ProvenanceOutOfOrder: return "ProvenanceOutOfOrder";
    }
    return "Unknown";
}

std::vector<Violation> validate_patch(const Patch& patch) {
    std::vector<Violation> out;
    const UpdateInstruction& u = patch.update;

    if (u.insertions.empty() && u.deletions.empty()) {
        out.push_back({ViolationCode::EmptyInstruction, "update instruction neither inserts nor deletes"});
    }
    for (const auto& po : u.insertions) {
        if (u.deletions.contains(po)) {
            out.push_back({ViolationCode::InsertDeleteOverlap,
                           "pair both inserted and deleted: " + po.predicate.str() + " " + po.object.to_ntriples()});
            break;
        }
    }
    auto has_blank = [](const std::set<PredicateObject>& pairs) {
        return std::any_of(pairs.begin(), pairs.end(), [](const auto& po) { return po.object.is_blank(); });
    };
    if (has_blank(u.insertions) || has_blank(u.deletions)) {
        out.push_back({ViolationCode::BlankNodeInInstruction, "instruction objects must be ground (no blank nodes)"});
    }
    for (const Iri& agent : patch.advocates) {
        if (patch.criticisers.contains(agent)) {
            out.push_back({ViolationCode::AdvocateCriticiserOverlap,
                           "agent is both advocate and criticiser: " + agent.str()});
            break;
        }
    }
    if (patch.types.empty()) {
        out.push_back({ViolationCode::MissingType, "patch has no pro:patchType"});
    }
    if (patch.provenance.empty()) {
        out.push_back({ViolationCode::MissingProvenance, "patch has no provenance event"});
    }
    for (std::size_t i = 1; i < patch.provenance.size(); ++i) {
        if (patch.provenance[i].performed_at < patch.provenance[i - 1].performed_at) {
            out.push_back({ViolationCode::ProvenanceOutOfOrder, "provenance timestamps decrease at event " +
                                                                    std::to_string(i)});
            break;
        }
    }
    return out;
}

namespace {
std::string summarize(const std::vector<Violation>& violations) {
    std::string msg = "patch is invalid:";
    for (const auto& v : violations) msg += " " + std::string(to_string(v.code));
    return msg;
}
}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorCode::Validation, summarize(violations)), violations_(std::move(violations)) {}

void require_valid(const Patch& patch) {
    auto violations = validate_patch(patch);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

std::string canonical_key(const UpdateInstruction& update, const Iri& dataset) {
    return dataset.str() + "|" + update.target_graph.str() + "|INS:" +
           join_lines(rdf::canonical_ntriples(update.insert_triples())) + "|DEL:" +
           join_lines(rdf::canonical_ntriples(update.delete_triples()));
}

}  // namespace patchr
