#pragma once

#include "patchr/error.hpp"
#include "patchr/rdf.hpp"
#include "patchr/time.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace patchr {

using rdf::Iri;
using rdf::Term;
using rdf::Triple;

namespace vocab {
inline const std::string kPatch = std::string(rdf::ns::pro) + "Patch";
inline const std::string kHasUpdate = std::string(rdf::ns::pro) + "hasUpdate";
inline const std::string kHasProvenance = std::string(rdf::ns::pro) + "hasProvenance";
inline const std::string kMemberOf = std::string(rdf::ns::pro) + "memberOf";
inline const std::string kAppliesTo = std::string(rdf::ns::pro) + "appliesTo";
inline const std::string kHasAdvocate = std::string(rdf::ns::pro) + "hasAdvocate";
inline const std::string kHasCriticiser = std::string(rdf::ns::pro) + "hasCriticiser";
inline const std::string kPatchType = std::string(rdf::ns::pro) + "patchType";
inline const std::string kComment = std::string(rdf::ns::pro) + "comment";
inline const std::string kStatus = std::string(rdf::ns::pro) + "status";

inline const std::string kUpdateInstruction = std::string(rdf::ns::guo) + "UpdateInstruction";
inline const std::string kTargetGraph = std::string(rdf::ns::guo) + "target_graph";
inline const std::string kTargetSubject = std::string(rdf::ns::guo) + "target_subject";
inline const std::string kInsert = std::string(rdf::ns::guo) + "insert";
inline const std::string kDelete = std::string(rdf::ns::guo) + "delete";

inline const std::string kDataCreation = std::string(rdf::ns::prv) + "DataCreation";
inline const std::string kPerformedBy = std::string(rdf::ns::prv) + "performedBy";
inline const std::string kInvolvedActor = std::string(rdf::ns::prv) + "involvedActor";
inline const std::string kPerformedAt = std::string(rdf::ns::prv) + "performedAt";

inline const std::string kDateTime = std::string(rdf::ns::xsd) + "dateTime";
}  // namespace vocab

struct PredicateObject {
    Iri predicate;
    Term object;

    auto operator<=>(const PredicateObject&) const = default;
    bool operator==(const PredicateObject&) const = default;
};

// One target graph and subject with insert/delete predicate-object sets.
// A "modify" is an instruction carrying both a deletion and an insertion.
struct UpdateInstruction {
    Iri target_graph;
    Iri target_subject;
    std::set<PredicateObject> insertions;
    std::set<PredicateObject> deletions;

    std::vector<Triple> insert_triples() const;
    std::vector<Triple> delete_triples() const;

    bool operator==(const UpdateInstruction&) const = default;
};

struct ProvenanceEvent {
    Iri performed_by;
    std::optional<Iri> involved_actor;
    Timestamp performed_at;

    bool operator==(const ProvenanceEvent&) const = default;
};

// Order used whenever provenance has to be put in a definite sequence.
bool provenance_before(const ProvenanceEvent& a, const ProvenanceEvent& b);

class PatchType {
public:
    enum class Kind { WrongFact, MissingFact, EncodingError, DatatypeError, Other };

    static PatchType wrong_fact() { return named(Kind::WrongFact); }
    static PatchType missing_fact() { return named(Kind::MissingFact); }
    static PatchType encoding_error() { return named(Kind::EncodingError); }
    static PatchType datatype_error() { return named(Kind::DatatypeError); }
    // Maps the pro: type IRIs back onto their named kinds.
    static PatchType from_iri(const Iri& iri);
    // Accepts the short names (WrongFact, ...) or an absolute IRI.
    static PatchType parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    const Iri& iri() const noexcept { return iri_; }
    // Short name for the named kinds, the IRI for Other.
    std::string name() const;

    bool operator<(const PatchType& other) const { return iri_ < other.iri_; }
    bool operator==(const PatchType& other) const { return iri_ == other.iri_; }

private:
    static PatchType named(Kind kind);
    PatchType(Kind kind, Iri iri) : kind_(kind), iri_(std::move(iri)) {}

    Kind kind_;
    Iri iri_;
};

enum class PatchStatus { Active, Resolved, Rejected };

std::string_view to_string(PatchStatus status);
std::optional<PatchStatus> parse_status(std::string_view text);
bool is_terminal(PatchStatus status);
bool can_transition(PatchStatus from, PatchStatus to);

struct Patch {
    // Unset for candidates that have not been minted by a repository yet.
    std::optional<Iri> id;
    UpdateInstruction update;
    Iri dataset;
    std::set<PatchType> types;
    PatchStatus status = PatchStatus::Active;
    std::set<Iri> advocates;
    std::set<Iri> criticisers;
    std::set<Iri> groups;
    std::optional<std::string> comment;
    std::vector<ProvenanceEvent> provenance;

    Timestamp latest_activity() const;

    bool operator==(const Patch&) const = default;
};

struct PatchGroup {
    Iri id;
    std::string label;
    std::optional<std::string> description;

    bool operator==(const PatchGroup&) const = default;
};

enum class ViolationCode {
    EmptyInstruction,
    InsertDeleteOverlap,
    BlankNodeInInstruction,
    AdvocateCriticiserOverlap,
    MissingType,
    MissingProvenance,
    ProvenanceOutOfOrder,
};

std::string_view to_string(ViolationCode code);

struct Violation {
    ViolationCode code;
    std::string message;
};

// Every violated Patch/UpdateInstruction invariant, in ViolationCode order.
std::vector<Violation> validate_patch(const Patch& patch);

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

// Throws ValidationError when validate_patch reports anything.
void require_valid(const Patch& patch);

// dataset|graph|INS:<sorted N-Triples>|DEL:<sorted N-Triples>
std::string canonical_key(const UpdateInstruction& update, const Iri& dataset);

}  // namespace patchr
