#pragma once

#include <stdexcept>
#include <string>

namespace cvest {

// Every recoverable failure the library reports, tagged so callers (and the
// CLI exit-code contract) can tell user/data errors apart without string
// matching.
enum class ErrorKind {
    parse_error,
    schema_error,
    empty_dataset,
    dimension_mismatch,
    singular_covariance,
    degenerate_target,
    invalid_delta,
    invalid_alpha,
    empty_surrogate,
    insufficient_data,
    invalid_split,
    invalid_argument,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse_error: return "ParseError";
        case ErrorKind::schema_error: return "SchemaError";
        case ErrorKind::empty_dataset: return "EmptyDataset";
        case ErrorKind::dimension_mismatch: return "DimensionMismatch";
        case ErrorKind::singular_covariance: return "SingularCovariance";
        case ErrorKind::degenerate_target: return "DegenerateTarget";
        case ErrorKind::invalid_delta: return "InvalidDelta";
        case ErrorKind::invalid_alpha: return "InvalidAlpha";
        case ErrorKind::empty_surrogate: return "EmptySurrogate";
        case ErrorKind::insufficient_data: return "InsufficientData";
        case ErrorKind::invalid_split: return "InvalidSplit";
        case ErrorKind::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace cvest
