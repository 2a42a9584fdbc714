#include "patchr/patch_turtle.hpp"

#include <algorithm>

namespace patchr {

using rdf::Graph;

namespace {

Term iri_term(const std::string& iri) { return Term::iri(iri); }

}  // namespace

void add_patch_triples(Graph& graph, const Patch& patch, const std::string& blank_prefix) {
    const Term subject = patch.id ? Term::iri(*patch.id) : Term::blank(blank_prefix + "patch");
    const Term type = iri_term(rdf::kRdfType);
    auto add = [&](const Term& s, const std::string& p, const Term& o) { graph.insert(Triple(s, iri_term(p), o)); };

    add(subject, rdf::kRdfType, iri_term(vocab::kPatch));

    const Term update = Term::blank(blank_prefix + "update");
    add(subject, vocab::kHasUpdate, update);
    add(update, rdf::kRdfType, iri_term(vocab::kUpdateInstruction));
    add(update, vocab::kTargetGraph, Term::iri(patch.update.target_graph));
    add(update, vocab::kTargetSubject, Term::iri(patch.update.target_subject));
    auto add_container = [&](const std::string& predicate, const std::string& label,
                             const std::set<PredicateObject>& pairs) {
        if (pairs.empty()) return;
        const Term node = Term::blank(blank_prefix + label);
        add(update, predicate, node);
        for (const auto& po : pairs) add(node, po.predicate.str(), po.object);
    };
    add_container(vocab::kInsert, "insert", patch.update.insertions);
    add_container(vocab::kDelete, "delete", patch.update.deletions);

    for (const Iri& a : patch.advocates) add(subject, vocab::kHasAdvocate, Term::iri(a));
    for (const Iri& c : patch.criticisers) add(subject, vocab::kHasCriticiser, Term::iri(c));
    add(subject, vocab::kAppliesTo, Term::iri(patch.dataset));
    add(subject, vocab::kStatus, Term::literal(std::string(to_string(patch.status))));
    for (const PatchType& t : patch.types) add(subject, vocab::kPatchType, Term::iri(t.iri()));
    for (const Iri& g : patch.groups) add(subject, vocab::kMemberOf, Term::iri(g));
    if (patch.comment) add(subject, vocab::kComment, Term::literal(*patch.comment));

    for (std::size_t i = 0; i < patch.provenance.size(); ++i) {
        const ProvenanceEvent& ev = patch.provenance[i];
        const Term node = Term::blank(blank_prefix + "prov" + std::to_string(i));
        add(subject, vocab::kHasProvenance, node);
        graph.insert(Triple(node, type, iri_term(vocab::kDataCreation)));
        add(node, vocab::kPerformedBy, Term::iri(ev.performed_by));
        if (ev.involved_actor) add(node, vocab::kInvolvedActor, Term::iri(*ev.involved_actor));
        add(node, vocab::kPerformedAt, Term::literal(ev.performed_at.to_rfc3339(), vocab::kDateTime));
    }
}

std::string patch_to_turtle(const Patch& patch, const rdf::PrefixMap& prefixes) {
    require_valid(patch);
    Graph graph;
    add_patch_triples(graph, patch);
    return rdf::serialize_turtle(graph, prefixes);
}

std::string patches_to_turtle(const std::vector<Patch>& patches, const rdf::PrefixMap& prefixes) {
    Graph graph;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        require_valid(patches[i]);
        add_patch_triples(graph, patches[i], "p" + std::to_string(i) + "_");
    }
    return rdf::serialize_turtle(graph, prefixes);
}

namespace {

class PatchReader {
public:
    explicit PatchReader(const Graph& graph) : graph_(graph) {}

    Patch read(const Term& subject) {
        name_ = subject.to_ntriples();

        auto updates = objects(subject, vocab::kHasUpdate);
        if (updates.empty()) fail("MissingUpdateInstruction", "patch has no pro:hasUpdate");
        if (updates.size() > 1) fail("MultipleUpdateInstructions", "only one UpdateInstruction per patch is allowed");
        if (updates.front().is_literal()) fail("MalformedUpdateInstruction", "pro:hasUpdate points to a literal");
        const Term& node = updates.front();

        std::optional<Iri> id;
        if (subject.is_iri()) id = subject.as_iri();

        Patch patch{
            .id = id,
            .update = UpdateInstruction{
                .target_graph = single_iri(node, vocab::kTargetGraph, "MalformedUpdateInstruction"),
                .target_subject = single_iri(node, vocab::kTargetSubject, "MalformedUpdateInstruction"),
                .insertions = pairs(node, vocab::kInsert),
                .deletions = pairs(node, vocab::kDelete),
            },
            .dataset = single_iri(subject, vocab::kAppliesTo, "MalformedDataset"),
        };

        auto statuses = objects(subject, vocab::kStatus);
        if (statuses.size() > 1) fail("MalformedStatus", "more than one pro:status");
        if (statuses.size() == 1) {
            auto status = statuses.front().is_literal() ? parse_status(statuses.front().value()) : std::nullopt;
            if (!status) fail("MalformedStatus", "unknown status " + statuses.front().to_ntriples());
            patch.status = *status;
        }

        for (const Term& t : objects(subject, vocab::kPatchType)) patch.types.insert(PatchType::from_iri(iri_of(t)));
        for (const Term& t : objects(subject, vocab::kHasAdvocate)) patch.advocates.insert(iri_of(t));
        for (const Term& t : objects(subject, vocab::kHasCriticiser)) patch.criticisers.insert(iri_of(t));
        for (const Term& t : objects(subject, vocab::kMemberOf)) patch.groups.insert(iri_of(t));

        auto comments = objects(subject, vocab::kComment);
        if (comments.size() > 1 || (comments.size() == 1 && !comments.front().is_literal())) {
            fail("MalformedValue", "pro:comment must be a single literal");
        }
        if (!comments.empty()) patch.comment = comments.front().value();

        for (const Term& p : objects(subject, vocab::kHasProvenance)) patch.provenance.push_back(provenance(p));
        std::sort(patch.provenance.begin(), patch.provenance.end(), provenance_before);
        return patch;
    }

private:
    [[noreturn]] void fail(const std::string& kind, const std::string& message) const {
        throw StructuralError(kind, name_, message);
    }

    std::vector<Term> objects(const Term& s, const std::string& p) const {
        std::vector<Term> out;
        for (const Triple& t : graph_.match(s, Term::iri(p), std::nullopt)) out.push_back(t.object);
        return out;
    }

    Iri iri_of(const Term& t) const {
        if (!t.is_iri()) fail("MalformedValue", "expected an IRI, got " + t.to_ntriples());
        return t.as_iri();
    }

    Iri single_iri(const Term& s, const std::string& p, const std::string& kind) const {
        auto found = objects(s, p);
        if (found.size() != 1 || !found.front().is_iri()) {
            fail(kind, "expected exactly one IRI for <" + p + ">, found " + std::to_string(found.size()));
        }
        return found.front().as_iri();
    }

    std::set<PredicateObject> pairs(const Term& update, const std::string& p) const {
        std::set<PredicateObject> out;
        for (const Term& container : objects(update, p)) {
            if (!container.is_blank()) fail("MalformedUpdateInstruction", "insert/delete must be a blank node");
            for (const Triple& t : graph_.match(container, std::nullopt, std::nullopt)) {
                out.insert(PredicateObject{t.predicate.as_iri(), t.object});
            }
        }
        return out;
    }

    ProvenanceEvent provenance(const Term& node) const {
        if (node.is_literal()) fail("MalformedProvenance", "pro:hasProvenance points to a literal");
        auto by = objects(node, vocab::kPerformedBy);
        auto at = objects(node, vocab::kPerformedAt);
        auto actor = objects(node, vocab::kInvolvedActor);
        if (by.size() != 1 || !by.front().is_iri()) fail("MalformedProvenance", "need exactly one prv:performedBy IRI");
        if (at.size() != 1 || !at.front().is_literal()) {
            fail("MalformedProvenance", "need exactly one prv:performedAt literal");
        }
        if (actor.size() > 1 || (actor.size() == 1 && !actor.front().is_iri())) {
            fail("MalformedProvenance", "prv:involvedActor must be at most one IRI");
        }
        ProvenanceEvent ev{.performed_by = by.front().as_iri(), .involved_actor = std::nullopt, .performed_at = {}};
        if (!actor.empty()) ev.involved_actor = actor.front().as_iri();
        try {
            ev.performed_at = Timestamp::parse(at.front().value());
        } catch (const Error& e) {
            fail("MalformedProvenance", e.what());
        }
        return ev;
    }

    const Graph& graph_;
    std::string name_;
};

}  // namespace

std::vector<Patch> patches_from_graph(const Graph& graph) {
    std::vector<Term> subjects;
    for (const Triple& t : graph.match(std::nullopt, Term::iri(rdf::kRdfType), Term::iri(vocab::kPatch))) {
        subjects.push_back(t.subject);
    }
    std::vector<Patch> out;
    PatchReader reader(graph);
    for (const Term& s : subjects) out.push_back(reader.read(s));
    return out;
}

std::vector<Patch> patch_from_turtle(std::string_view document) {
    return patches_from_graph(rdf::parse_turtle(document).graph);
}

}  // namespace patchr
