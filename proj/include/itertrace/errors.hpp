#pragma once

#include <stdexcept>
#include <string>

namespace itertrace {

enum class ErrorKind {
    UnreadableFile,
    MissingColumn,
    TooManyBadRows,
    EmptyTrace,
    NoMainStream,
    EmptyMainStream,
    InvalidIterationCount,
    NoPatternFound,
    AmbiguousLoops,
    NoIterations,
    InvalidConfig,
    IoError,
};

/// All pipeline failures are thrown as Error; the message always names the
/// failing stage so CLI users can tell ingest problems from mining problems.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace itertrace
