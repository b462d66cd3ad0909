#include "revmetrics/error.hpp"

namespace revmetrics {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyReferenceList: return "EmptyReferenceList";
    case ErrorKind::InvalidInterval: return "InvalidInterval";
    case ErrorKind::FlatObjective: return "FlatObjective";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::BinMismatch: return "BinMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyKeyword: return "EmptyKeyword";
    case ErrorKind::NetworkError: return "NetworkError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::UnknownPaper: return "UnknownPaper";
    case ErrorKind::InvalidDateRange: return "InvalidDateRange";
    case ErrorKind::LlmUnavailable: return "LlmUnavailable";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::StorageError: return "StorageError";
    case ErrorKind::CorruptLine: return "CorruptLine";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ConstantInput: return "ConstantInput";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

} // namespace revmetrics
