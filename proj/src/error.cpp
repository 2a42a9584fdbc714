#include "patchr/error.hpp"

#include <utility>

namespace patchr {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidTerm: return "InvalidTerm";
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::UndefinedPrefix: return "UndefinedPrefix";
    case ErrorCode::RelativeIri: return "RelativeIri";
    case ErrorCode::Canonicalization: return "CanonicalizationError";
    case ErrorCode::Structural: return "StructuralError";
    case ErrorCode::Validation: return "ValidationFailed";
    case ErrorCode::UnknownPatch: return "UnknownPatch";
    case ErrorCode::TerminalPatch: return "TerminalPatch";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::ConflictingPosition: return "ConflictingPosition";
    case ErrorCode::DuplicateGroup: return "DuplicateGroup";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::CorruptJournal: return "CorruptJournal";
    case ErrorCode::JournalIo: return "JournalIo";
    case ErrorCode::JournalLocked: return "JournalLocked";
    case ErrorCode::GraphMismatch: return "GraphMismatch";
    case ErrorCode::InconsistentVote: return "InconsistentVote";
    case ErrorCode::InvalidContext: return "InvalidContext";
    case ErrorCode::InvalidFilter: return "InvalidFilter";
    case ErrorCode::MissingSubmitter: return "MissingSubmitter";
    case ErrorCode::InvalidTimestamp: return "InvalidTimestamp";
    case ErrorCode::InvalidJson: return "InvalidJson";
    }
    return "Unknown";
}

ParseError::ParseError(ErrorCode code, std::size_t line, std::size_t column, std::string token,
                       const std::string& message)
    : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column), token_(std::move(token)) {}

StructuralError::StructuralError(std::string kind, std::string patch, const std::string& message)
    : Error(ErrorCode::Structural, kind + " (" + patch + "): " + message),
      kind_(std::move(kind)), patch_(std::move(patch)) {}

CorruptJournal::CorruptJournal(std::size_t position, const std::string& message)
    : Error(ErrorCode::CorruptJournal, "journal record " + std::to_string(position) + ": " + message),
      position_(position) {}

}  // namespace patchr
