#include "patchr/json_codec.hpp"
#include "patchr/repository.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

namespace patchr {

namespace {

Json payload_to_json(const EventPayload& payload) {
    struct Visitor {
        Json operator()(const PatchSubmitted& e) const {
            Json out = {{"candidate", patch_to_json(e.candidate)}, {"submitter", e.submitter.str()},
                        {"merged", e.merged}};
            if (e.patch_id) out["patchId"] = e.patch_id->str();
            return out;
        }
        Json operator()(const VoteCast& e) const {
            return {{"patchId", e.patch_id.str()}, {"agent", e.agent.str()}, {"position", to_string(e.position)}};
        }
        Json operator()(const StatusChanged& e) const {
            return {{"patchId", e.patch_id.str()}, {"status", to_string(e.status)}, {"agent", e.agent.str()}};
        }
        Json operator()(const GroupCreated& e) const { return {{"group", group_to_json(e.group)}}; }
        Json operator()(const GroupAssigned& e) const {
            return {{"patchId", e.patch_id.str()}, {"groupId", e.group_id.str()}};
        }
    };
    return std::visit(Visitor{}, payload);
}

EventPayload payload_from_json(const std::string& kind, const Json& j) {
    if (kind == "PatchSubmitted") {
        PatchSubmitted e{patch_from_json(require_member(j, "candidate")), Iri(require_string(j, "submitter")),
                         std::nullopt, false};
        if (auto id = optional_string(j, "patchId")) e.patch_id = Iri(*id);
        if (auto it = j.find("merged"); it != j.end() && it->is_boolean()) e.merged = it->get<bool>();
        return e;
    }
    if (kind == "VoteCast") {
        auto position = parse_position(require_string(j, "position"));
        if (!position) throw Error(ErrorCode::InvalidJson, "unknown vote position");
        return VoteCast{Iri(require_string(j, "patchId")), Iri(require_string(j, "agent")), *position};
    }
    if (kind == "StatusChanged") {
        auto status = parse_status(require_string(j, "status"));
        if (!status) throw Error(ErrorCode::InvalidJson, "unknown status");
        return StatusChanged{Iri(require_string(j, "patchId")), *status, Iri(require_string(j, "agent"))};
    }
    if (kind == "GroupCreated") return GroupCreated{group_from_json(require_member(j, "group"))};
    if (kind == "GroupAssigned") {
        return GroupAssigned{Iri(require_string(j, "patchId")), Iri(require_string(j, "groupId"))};
    }
    throw Error(ErrorCode::InvalidJson, "unknown event kind '" + kind + "'");
}

[[noreturn]] void io_error(const std::string& what, const std::filesystem::path& path) {
    throw Error(ErrorCode::JournalIo, what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

std::string event_to_json_line(const RepositoryEvent& event) {
    Json j = {{"sequence", event.sequence},
              {"at", event.at.to_rfc3339()},
              {"kind", event_kind(event)},
              {"payload", payload_to_json(event.payload)}};
    return j.dump();
}

RepositoryEvent event_from_json_line(std::string_view line) {
    Json j = Json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidJson, "journal record is not a JSON object");
    const Json& seq = require_member(j, "sequence");
    if (!seq.is_number_unsigned()) throw Error(ErrorCode::InvalidJson, "sequence must be a positive integer");
    return RepositoryEvent{seq.get<std::uint64_t>(), Timestamp::parse(require_string(j, "at")),
                           payload_from_json(require_string(j, "kind"), require_member(j, "payload"))};
}

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) io_error("cannot open journal", path_);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw Error(ErrorCode::JournalLocked, "journal " + path_.string() + " is locked by another process");
    }
}

Journal::~Journal() {
    if (fd_ >= 0) ::close(fd_);  // releases the lock
}

std::vector<RepositoryEvent> Journal::read_all() {
    std::string data;
    char buf[1 << 16];
    off_t offset = 0;
    for (;;) {
        ssize_t n = ::pread(fd_, buf, sizeof buf, offset);
        if (n < 0) io_error("cannot read journal", path_);
        if (n == 0) break;
        data.append(buf, static_cast<std::size_t>(n));
        offset += n;
    }

    std::vector<RepositoryEvent> events;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < data.size()) {
        ++line_no;
        std::size_t nl = data.find('\n', pos);
        bool complete = nl != std::string::npos;
        std::string_view line(data.data() + pos, (complete ? nl : data.size()) - pos);
        try {
            events.push_back(event_from_json_line(line));
        } catch (const std::exception& e) {
            if (complete) throw CorruptJournal(line_no, e.what());
            // Torn tail from an interrupted append: it was never acknowledged.
            if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) io_error("cannot truncate journal", path_);
            break;
        }
        if (!complete && ::write(fd_, "\n", 1) != 1) io_error("cannot repair journal", path_);
        pos = complete ? nl + 1 : data.size();
    }
    return events;
}

void Journal::append(const RepositoryEvent& event) {
    std::string line = event_to_json_line(event) + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
        ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_error("cannot append to journal", path_);
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0) io_error("cannot sync journal", path_);
}

Repository::Repository(Iri repo_base, std::optional<std::filesystem::path> journal, Clock clock)
    : clock_(std::move(clock)) {
    if (journal) {
        journal_ = std::make_unique<Journal>(*journal);
        events_ = journal_->read_all();
    }
    current_ = std::make_shared<const RepositoryState>(replay(events_, repo_base));
}

std::shared_ptr<const RepositoryState> Repository::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return current_;
}

std::vector<RepositoryEvent> Repository::events() const {
    std::lock_guard lock(write_mutex_);
    return events_;
}

RepositoryState::Outcome Repository::commit(EventPayload payload) {
    std::lock_guard lock(write_mutex_);
    // Only this thread replaces current_, so reading it here needs no lock.
    auto next = std::make_shared<RepositoryState>(*current_);
    RepositoryEvent event = next_event(*next, std::move(payload), clock_());
    auto outcome = next->apply(event);
    if (auto* submitted = std::get_if<PatchSubmitted>(&event.payload)) {
        submitted->patch_id = outcome.patch_id;
        submitted->merged = outcome.merged;
    }
    if (journal_) journal_->append(event);
    events_.push_back(std::move(event));
    std::lock_guard publish(snapshot_mutex_);
    current_ = std::move(next);
    return outcome;
}

Repository::SubmitResult Repository::submit(const Patch& candidate, const Iri& submitter) {
    auto outcome = commit(PatchSubmitted{candidate, submitter, std::nullopt, false});
    return {*outcome.patch_id, outcome.merged};
}

void Repository::vote(const Iri& patch_id, const Iri& agent, VotePosition position) {
    commit(VoteCast{patch_id, agent, position});
}

void Repository::set_status(const Iri& patch_id, PatchStatus status, const Iri& agent) {
    commit(StatusChanged{patch_id, status, agent});
}

void Repository::create_group(const PatchGroup& group) { commit(GroupCreated{group}); }

void Repository::assign_group(const Iri& patch_id, const Iri& group_id) {
    commit(GroupAssigned{patch_id, group_id});
}

}  // namespace patchr
