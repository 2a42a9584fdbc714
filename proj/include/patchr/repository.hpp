#pragma once

#include "patchr/patch.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace patchr {

enum class VotePosition { Advocate, Criticiser, Withdrawn };

std::string_view to_string(VotePosition position);
std::optional<VotePosition> parse_position(std::string_view text);

struct PatchSubmitted {
    Patch candidate;
    Iri submitter;
    // Outcome recorded at submission time; replay checks it is reproduced.
    std::optional<Iri> patch_id;
    bool merged = false;

    bool operator==(const PatchSubmitted&) const = default;
};

struct VoteCast {
    Iri patch_id;
    Iri agent;
    VotePosition position;

    bool operator==(const VoteCast&) const = default;
};

struct StatusChanged {
    Iri patch_id;
    PatchStatus status;
    Iri agent;

    bool operator==(const StatusChanged&) const = default;
};

struct GroupCreated {
    PatchGroup group;

    bool operator==(const GroupCreated&) const = default;
};

struct GroupAssigned {
    Iri patch_id;
    Iri group_id;

    bool operator==(const GroupAssigned&) const = default;
};

using EventPayload = std::variant<PatchSubmitted, VoteCast, StatusChanged, GroupCreated, GroupAssigned>;

struct RepositoryEvent {
    std::uint64_t sequence = 0;
    Timestamp at;
    EventPayload payload;

    bool operator==(const RepositoryEvent&) const = default;
};

std::string_view event_kind(const RepositoryEvent& event);

// Patches are immutable once built; a state copy shares them.
using PatchPtr = std::shared_ptr<const Patch>;

class RepositoryState {
public:
    explicit RepositoryState(Iri repo_base);

    const Iri& repo_base() const noexcept { return repo_base_; }
    const std::map<Iri, PatchPtr>& patches() const noexcept { return patches_; }
    const std::map<std::string, Iri>& by_key() const noexcept { return by_key_; }
    const std::map<Iri, PatchGroup>& groups() const noexcept { return groups_; }
    std::uint64_t next_sequence() const noexcept { return next_sequence_; }
    // Time of the last applied event; new events are clamped to it.
    Timestamp last_event_at() const noexcept { return last_at_; }

    const Patch* find(const Iri& id) const;
    const Patch& get(const Iri& id) const;  // throws UnknownPatch
    // `<repo-base>/patch/<n>`
    Iri mint_id(std::uint64_t n) const;

    struct Outcome {
        std::optional<Iri> patch_id;
        bool merged = false;
    };
    // Checks every precondition, then applies; on error the state is untouched.
    // Throws the domain error (UnknownPatch, TerminalPatch, ...) or
    // CorruptJournal for an out-of-order sequence or timestamp.
    Outcome apply(const RepositoryEvent& event);

    bool operator==(const RepositoryState& other) const;

private:
    Outcome apply_submit(const PatchSubmitted& e, Timestamp at);
    void apply_vote(const VoteCast& e);
    void apply_status(const StatusChanged& e);
    void apply_group(const GroupCreated& e);
    void apply_assign(const GroupAssigned& e);
    Patch& mutable_patch(const Iri& id);

    Iri repo_base_;
    std::map<Iri, PatchPtr> patches_;
    std::map<std::string, Iri> by_key_;
    std::map<Iri, PatchGroup> groups_;
    std::uint64_t next_sequence_ = 1;
    Timestamp last_at_;
};

// Functional operations: each returns the successor state and the event that
// produced it. `now` is clamped so event timestamps never decrease.
struct Transition {
    RepositoryState state;
    RepositoryEvent event;
};

struct Submission {
    RepositoryState state;
    RepositoryEvent event;
    Iri patch_id;
    bool merged = false;
};

Submission submit_patch(const RepositoryState& state, const Patch& candidate, const Iri& submitter, Timestamp now);
Transition cast_vote(const RepositoryState& state, const Iri& patch_id, const Iri& agent, VotePosition position,
                     Timestamp now);
Transition change_status(const RepositoryState& state, const Iri& patch_id, PatchStatus status, const Iri& agent,
                         Timestamp now);
Transition create_group(const RepositoryState& state, const PatchGroup& group, Timestamp now);
Transition assign_group(const RepositoryState& state, const Iri& patch_id, const Iri& group_id, Timestamp now);

// Builds the next event for `payload` against `state` (sequence, clamped time).
RepositoryEvent next_event(const RepositoryState& state, EventPayload payload, Timestamp now);

// Rebuilds state from a journal. Throws CorruptJournal (with the 1-based
// position) on a sequence gap, a decreasing timestamp, an event that does not
// apply, or a recorded submission outcome that is not reproduced.
RepositoryState replay(const std::vector<RepositoryEvent>& journal, const Iri& repo_base);

// Explicit agent, else the single advocate, else the involved actor of the
// last provenance event. Throws MissingSubmitter.
Iri resolve_submitter(const Patch& candidate, const std::optional<Iri>& explicit_agent);

enum class PatchOrder { MostRecent, MostPopular };

std::string_view to_string(PatchOrder order);
std::optional<PatchOrder> parse_order(std::string_view text);  // "recent" | "popular"

struct PatchFilter {
    std::optional<Iri> dataset;
    std::optional<PatchStatus> status;
    std::optional<std::set<PatchType>> types;  // matches patches with any of these
    std::optional<std::size_t> min_advocates;
    std::optional<Iri> target_subject;
    PatchOrder order = PatchOrder::MostRecent;
    std::optional<std::size_t> limit;  // unset = no limit; must be >= 1
    std::size_t offset = 0;
};

// Throws InvalidFilter for limit 0.
std::vector<PatchPtr> query_patches(const RepositoryState& state, const PatchFilter& filter);

struct PatchSummary {
    Iri id;
    std::size_t advocates = 0;
    std::size_t criticisers = 0;
    Timestamp latest;

    bool operator==(const PatchSummary&) const = default;
};

std::vector<PatchSummary> report(const RepositoryState& state, PatchOrder kind, std::size_t limit);
std::vector<PatchPtr> entity_report(const RepositoryState& state, const Iri& subject);

// Every patch as one Turtle document, in id order.
std::string snapshot_turtle(const RepositoryState& state);

// Append-only JSON-lines journal holding an exclusive advisory lock for its
// lifetime. Each append is flushed and fsync'd before returning.
class Journal {
public:
    explicit Journal(std::filesystem::path path);
    ~Journal();
    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;

    // Events on disk. A torn final line (no newline, unparsable) left by a
    // crash mid-append is dropped and truncated away.
    std::vector<RepositoryEvent> read_all();
    void append(const RepositoryEvent& event);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

std::string event_to_json_line(const RepositoryEvent& event);
RepositoryEvent event_from_json_line(std::string_view line);

// Live repository: one writer at a time, readers take immutable snapshots.
class Repository {
public:
    using Clock = std::function<Timestamp()>;

    // Replays the journal when one is given; in-memory otherwise.
    Repository(Iri repo_base, std::optional<std::filesystem::path> journal = std::nullopt,
               Clock clock = &Timestamp::now);

    std::shared_ptr<const RepositoryState> snapshot() const;

    struct SubmitResult {
        Iri patch_id;
        bool merged = false;
    };
    SubmitResult submit(const Patch& candidate, const Iri& submitter);
    void vote(const Iri& patch_id, const Iri& agent, VotePosition position);
    void set_status(const Iri& patch_id, PatchStatus status, const Iri& agent);
    void create_group(const PatchGroup& group);
    void assign_group(const Iri& patch_id, const Iri& group_id);

    // Events accepted since construction plus those replayed at start-up.
    std::vector<RepositoryEvent> events() const;

private:
    RepositoryState::Outcome commit(EventPayload payload);

    Clock clock_;
    std::unique_ptr<Journal> journal_;
    mutable std::mutex write_mutex_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const RepositoryState> current_;
    std::vector<RepositoryEvent> events_;
};

}  // namespace patchr
