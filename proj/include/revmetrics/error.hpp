#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revmetrics {

enum class ErrorKind {
    // indicator math
    EmptySample,
    DegenerateSample,
    IndexOutOfRange,
    LengthMismatch,
    EmptyReferenceList,
    InvalidInterval,
    FlatObjective,
    ZeroBaseline,
    BinMismatch,
    InvalidArgument,
    // retrieval
    EmptyKeyword,
    NetworkError,
    RateLimited,
    ParseError,
    EmptyResult,
    UnknownPaper,
    InvalidDateRange,
    LlmUnavailable,
    MalformedResponse,
    // snapshot
    SchemaMismatch,
    StorageError,
    CorruptLine,
    // analysis
    EmptyInput,
    ConstantInput,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every library failure surfaces as this exception; what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &detail);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string &detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

} // namespace revmetrics
