#pragma once

#include <stdexcept>
#include <string>

namespace af {

// Base class for all toolkit errors. Subclasses mirror the failure
// categories surfaced at module boundaries so callers (and the CLI exit-code
// mapping) can discriminate without string matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed text input (Pharaoh lines, TSV rows, score sidecars).
struct ParseError : Error {
    using Error::Error;
};

// Two alignment sets or matrices disagree on declared dimensions.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid model/experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Empty or unusable data where at least one usable record is required.
struct DataError : Error {
    using Error::Error;
};

// Non-finite or otherwise undefined numeric computation.
struct NumericError : Error {
    using Error::Error;
};

// Empty span or span index out of sequence bounds.
struct SpanError : Error {
    using Error::Error;
};

// Freeze strategy parameter out of range.
struct StrategyError : Error {
    using Error::Error;
};

// Gradient store does not match the parameter store.
struct GradientError : Error {
    using Error::Error;
};

// Activation trace does not belong to the model it is replayed against.
struct StateError : Error {
    using Error::Error;
};

// Realignment batch cannot be built (no links).
struct BatchError : Error {
    using Error::Error;
};

// Synthetic-language spec is internally inconsistent.
struct SpecError : Error {
    using Error::Error;
};

// Encoder input violates vocabulary or length bounds.
struct InputError : Error {
    using Error::Error;
};

// File could not be opened, read, or written.
struct IoError : Error {
    using Error::Error;
};

} // namespace af
