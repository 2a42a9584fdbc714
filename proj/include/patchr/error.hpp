#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patchr {

enum class ErrorCode {
    InvalidTerm,
    Syntax,
    UndefinedPrefix,
    RelativeIri,
    Canonicalization,
    Structural,
    Validation,
    UnknownPatch,
    TerminalPatch,
    IllegalTransition,
    ConflictingPosition,
    DuplicateGroup,
    UnknownGroup,
    CorruptJournal,
    JournalIo,
    JournalLocked,
    GraphMismatch,
    InconsistentVote,
    InvalidContext,
    InvalidFilter,
    MissingSubmitter,
    InvalidTimestamp,
    InvalidJson,
};

std::string_view to_string(ErrorCode code);

// Base of every error raised by the library. code() is stable and
// is what the service and CLI map onto status/exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Positioned Turtle error. line and column are 1-based; column counts bytes.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t line, std::size_t column, std::string token,
               const std::string& message);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& token() const noexcept { return token_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string token_;
};

// Patch document that parses as RDF but does not describe a patch.
// kind() is one of MissingUpdateInstruction, MultipleUpdateInstructions,
// MalformedUpdateInstruction, MalformedProvenance, MalformedDataset,
// MalformedStatus, MalformedValue.
class StructuralError : public Error {
public:
    StructuralError(std::string kind, std::string patch, const std::string& message);

    const std::string& kind() const noexcept { return kind_; }
    const std::string& patch() const noexcept { return patch_; }

private:
    std::string kind_;
    std::string patch_;
};

class CorruptJournal : public Error {
public:
    CorruptJournal(std::size_t position, const std::string& message);

    // 1-based record index (line number for journal files).
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace patchr
