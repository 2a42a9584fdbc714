#include "patchr/repository.hpp"

#include "patchr/patch_turtle.hpp"

#include <algorithm>

namespace patchr {

std::string_view to_string(VotePosition position) {
    switch (position) {
    case VotePosition::Advocate: return "advocate";
    case VotePosition::Criticiser: return "criticiser";
    case VotePosition::Withdrawn: return "withdrawn";
    }
    return "withdrawn";
}

std::optional<VotePosition> parse_position(std::string_view text) {
    if (text == "advocate") return VotePosition::Advocate;
    if (text == "criticiser" || text == "critic") return VotePosition::Criticiser;
    if (text == "withdrawn" || text == "withdraw") return VotePosition::Withdrawn;
    return std::nullopt;
}

std::string_view to_string(PatchOrder order) {
    return order == PatchOrder::MostPopular ? "popular" : "recent";
}

std::optional<PatchOrder> parse_order(std::string_view text) {
    if (text == "recent") return PatchOrder::MostRecent;
    if (text == "popular") return PatchOrder::MostPopular;
    return std::nullopt;
}

std::string_view event_kind(const RepositoryEvent& event) {
    struct Visitor {
        std::string_view operator()(const PatchSubmitted&) const { return "PatchSubmitted"; }
        std::string_view operator()(const VoteCast&) const { return "VoteCast"; }
        std::string_view operator()(const StatusChanged&) const { return "StatusChanged"; }
        std::string_view operator()(const GroupCreated&) const { return "GroupCreated"; }
        std::string_view operator()(const GroupAssigned&) const { return "GroupAssigned"; }
    };
    return std::visit(Visitor{}, event.payload);
}

RepositoryState::RepositoryState(Iri repo_base) : repo_base_(std::move(repo_base)) {}

const Patch* RepositoryState::find(const Iri& id) const {
    auto it = patches_.find(id);
    return it == patches_.end() ? nullptr : it->second.get();
}

const Patch& RepositoryState::get(const Iri& id) const {
    const Patch* p = find(id);
    if (!p) throw Error(ErrorCode::UnknownPatch, "no patch " + id.str());
    return *p;
}

Iri RepositoryState::mint_id(std::uint64_t n) const {
    std::string base = repo_base_.str();
    if (base.back() != '/' && base.back() != '#') base += '/';
    return Iri(base + "patch/" + std::to_string(n));
}

Patch& RepositoryState::mutable_patch(const Iri& id) {
    auto it = patches_.find(id);
    if (it == patches_.end()) throw Error(ErrorCode::UnknownPatch, "no patch " + id.str());
    // Copy on write: other states may share the old value.
    auto fresh = std::make_shared<Patch>(*it->second);
    it->second = fresh;
    return *fresh;
}

RepositoryState::Outcome RepositoryState::apply(const RepositoryEvent& event) {
    if (event.sequence != next_sequence_) {
        throw Error(ErrorCode::CorruptJournal, "expected sequence " + std::to_string(next_sequence_) + ", got " +
                                                   std::to_string(event.sequence));
    }
    if (event.at < last_at_) throw Error(ErrorCode::CorruptJournal, "event timestamp goes backwards");

    // Every apply_* checks its preconditions before touching anything.
    Outcome outcome;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PatchSubmitted>) outcome = apply_submit(e, event.at);
            else if constexpr (std::is_same_v<T, VoteCast>) apply_vote(e);
            else if constexpr (std::is_same_v<T, StatusChanged>) apply_status(e);
            else if constexpr (std::is_same_v<T, GroupCreated>) apply_group(e);
            else apply_assign(e);
        },
        event.payload);
    next_sequence_ = event.sequence + 1;
    last_at_ = event.at;
    return outcome;
}

RepositoryState::Outcome RepositoryState::apply_submit(const PatchSubmitted& e, Timestamp at) {
    require_valid(e.candidate);
    const std::string key = canonical_key(e.candidate.update, e.candidate.dataset);

    auto existing = by_key_.find(key);
    if (existing != by_key_.end()) {
        const Iri id = existing->second;
        if (get(id).criticisers.contains(e.submitter)) {
            throw Error(ErrorCode::ConflictingPosition,
                        e.submitter.str() + " criticises the equivalent patch " + id.str());
        }
        Patch& patch = mutable_patch(id);
        patch.advocates.insert(e.submitter);
        patch.types.insert(e.candidate.types.begin(), e.candidate.types.end());
        patch.groups.insert(e.candidate.groups.begin(), e.candidate.groups.end());
        patch.provenance.push_back(ProvenanceEvent{e.candidate.provenance.back().performed_by, e.submitter,
                                                   std::max(at, patch.latest_activity())});
        std::stable_sort(patch.provenance.begin(), patch.provenance.end(), provenance_before);
        return {id, true};
    }

    Patch patch = e.candidate;
    patch.id = mint_id(patches_.size() + 1);
    patch.status = PatchStatus::Active;
    patch.advocates = {e.submitter};
    patch.criticisers.clear();
    std::stable_sort(patch.provenance.begin(), patch.provenance.end(), provenance_before);
    const Iri id = *patch.id;
    patches_.emplace(id, std::make_shared<const Patch>(std::move(patch)));
    by_key_.emplace(key, id);
    return {id, false};
}

void RepositoryState::apply_vote(const VoteCast& e) {
    if (is_terminal(get(e.patch_id).status)) {
        throw Error(ErrorCode::TerminalPatch, "patch " + e.patch_id.str() + " is closed for voting");
    }
    Patch& patch = mutable_patch(e.patch_id);
    patch.advocates.erase(e.agent);
    patch.criticisers.erase(e.agent);
    if (e.position == VotePosition::Advocate) patch.advocates.insert(e.agent);
    if (e.position == VotePosition::Criticiser) patch.criticisers.insert(e.agent);
}

void RepositoryState::apply_status(const StatusChanged& e) {
    const Patch& current = get(e.patch_id);
    if (!can_transition(current.status, e.status)) {
        throw Error(ErrorCode::IllegalTransition, std::string("cannot move ") + e.patch_id.str() + " from " +
                                                      std::string(to_string(current.status)) + " to " +
                                                      std::string(to_string(e.status)));
    }
    Patch& patch = mutable_patch(e.patch_id);
    patch.status = e.status;
    if (is_terminal(e.status)) by_key_.erase(canonical_key(patch.update, patch.dataset));
}

void RepositoryState::apply_group(const GroupCreated& e) {
    if (!groups_.emplace(e.group.id, e.group).second) {
        throw Error(ErrorCode::DuplicateGroup, "group " + e.group.id.str() + " already exists");
    }
}

void RepositoryState::apply_assign(const GroupAssigned& e) {
    if (!groups_.contains(e.group_id)) throw Error(ErrorCode::UnknownGroup, "no group " + e.group_id.str());
    mutable_patch(e.patch_id).groups.insert(e.group_id);
}

bool RepositoryState::operator==(const RepositoryState& other) const {
    if (repo_base_ != other.repo_base_ || by_key_ != other.by_key_ || groups_ != other.groups_ ||
        next_sequence_ != other.next_sequence_ || last_at_ != other.last_at_ ||
        patches_.size() != other.patches_.size()) {
        return false;
    }
    return std::equal(patches_.begin(), patches_.end(), other.patches_.begin(), [](const auto& a, const auto& b) {
        return a.first == b.first && *a.second == *b.second;
    });
}

RepositoryEvent next_event(const RepositoryState& state, EventPayload payload, Timestamp now) {
    return RepositoryEvent{state.next_sequence(), std::max(now, state.last_event_at()), std::move(payload)};
}

namespace {

Transition transition(const RepositoryState& state, EventPayload payload, Timestamp now) {
    Transition t{state, next_event(state, std::move(payload), now)};
    t.state.apply(t.event);
    return t;
}

}  // namespace

Submission submit_patch(const RepositoryState& state, const Patch& candidate, const Iri& submitter, Timestamp now) {
    Submission s{state, next_event(state, PatchSubmitted{candidate, submitter, std::nullopt, false}, now),
                 state.repo_base(), false};
    auto outcome = s.state.apply(s.event);
    auto& recorded = std::get<PatchSubmitted>(s.event.payload);
    recorded.patch_id = outcome.patch_id;
    recorded.merged = outcome.merged;
    s.patch_id = *outcome.patch_id;
    s.merged = outcome.merged;
    return s;
}

Transition cast_vote(const RepositoryState& state, const Iri& patch_id, const Iri& agent, VotePosition position,
                     Timestamp now) {
    return transition(state, VoteCast{patch_id, agent, position}, now);
}

Transition change_status(const RepositoryState& state, const Iri& patch_id, PatchStatus status, const Iri& agent,
                         Timestamp now) {
    return transition(state, StatusChanged{patch_id, status, agent}, now);
}

Transition create_group(const RepositoryState& state, const PatchGroup& group, Timestamp now) {
    return transition(state, GroupCreated{group}, now);
}

Transition assign_group(const RepositoryState& state, const Iri& patch_id, const Iri& group_id, Timestamp now) {
    return transition(state, GroupAssigned{patch_id, group_id}, now);
}

RepositoryState replay(const std::vector<RepositoryEvent>& journal, const Iri& repo_base) {
    RepositoryState state(repo_base);
    for (std::size_t i = 0; i < journal.size(); ++i) {
        const RepositoryEvent& event = journal[i];
        RepositoryState::Outcome outcome;
        try {
            outcome = state.apply(event);
        } catch (const Error& e) {
            throw CorruptJournal(i + 1, std::string(event_kind(event)) + ": " + e.what());
        }
        if (const auto* submitted = std::get_if<PatchSubmitted>(&event.payload)) {
            if (submitted->patch_id && (submitted->patch_id != outcome.patch_id || submitted->merged != outcome.merged)) {
                throw CorruptJournal(i + 1, "submission outcome differs from the recorded one");
            }
        }
    }
    return state;
}

Iri resolve_submitter(const Patch& candidate, const std::optional<Iri>& explicit_agent) {
    if (explicit_agent) return *explicit_agent;
    if (candidate.advocates.size() == 1) return *candidate.advocates.begin();
    if (!candidate.provenance.empty() && candidate.provenance.back().involved_actor) {
        return *candidate.provenance.back().involved_actor;
    }
    throw Error(ErrorCode::MissingSubmitter, "no submitting agent given and none can be inferred from the patch");
}

namespace {

bool matches(const Patch& p, const PatchFilter& f) {
    if (f.dataset && p.dataset != *f.dataset) return false;
    if (f.status && p.status != *f.status) return false;
    if (f.target_subject && p.update.target_subject != *f.target_subject) return false;
    if (f.min_advocates && p.advocates.size() < *f.min_advocates) return false;
    if (f.types) {
        bool any = std::any_of(f.types->begin(), f.types->end(), [&](const PatchType& t) { return p.types.contains(t); });
        if (!any) return false;
    }
    return true;
}

bool ranks_before(const Patch& a, const Patch& b, PatchOrder order) {
    if (order == PatchOrder::MostPopular && a.advocates.size() != b.advocates.size()) {
        return a.advocates.size() > b.advocates.size();
    }
    Timestamp ta = a.latest_activity(), tb = b.latest_activity();
    if (ta != tb) return ta > tb;
    return *a.id < *b.id;
}

}  // namespace

std::vector<PatchPtr> query_patches(const RepositoryState& state, const PatchFilter& filter) {
    if (filter.limit && *filter.limit == 0) throw Error(ErrorCode::InvalidFilter, "limit must be at least 1");
    std::vector<PatchPtr> out;
    for (const auto& [id, patch] : state.patches()) {
        if (matches(*patch, filter)) out.push_back(patch);
    }
    std::sort(out.begin(), out.end(),
              [&](const PatchPtr& a, const PatchPtr& b) { return ranks_before(*a, *b, filter.order); });
    std::size_t begin = std::min(filter.offset, out.size());
    std::size_t end = filter.limit ? std::min(out.size(), begin + *filter.limit) : out.size();
    return {out.begin() + static_cast<std::ptrdiff_t>(begin), out.begin() + static_cast<std::ptrdiff_t>(end)};
}

std::vector<PatchSummary> report(const RepositoryState& state, PatchOrder kind, std::size_t limit) {
    PatchFilter filter;
    filter.order = kind;
    filter.limit = limit;
    std::vector<PatchSummary> out;
    for (const PatchPtr& p : query_patches(state, filter)) {
        out.push_back(PatchSummary{*p->id, p->advocates.size(), p->criticisers.size(), p->latest_activity()});
    }
    return out;
}

std::vector<PatchPtr> entity_report(const RepositoryState& state, const Iri& subject) {
    std::vector<PatchPtr> out;
    for (const auto& [id, patch] : state.patches()) {
        if (patch->update.target_subject == subject) out.push_back(patch);
    }
    return out;
}

std::string snapshot_turtle(const RepositoryState& state) {
    std::vector<Patch> patches;
    patches.reserve(state.patches().size());
    for (const auto& [id, patch] : state.patches()) patches.push_back(*patch);
    rdf::PrefixMap prefixes;
    prefixes.set("repo", state.repo_base().str());
    return patches_to_turtle(patches, prefixes);
}

}  // namespace patchr
