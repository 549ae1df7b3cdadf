#ifndef WF_ERRORS_HPP
#define WF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wf {

// Error taxonomy. The CLI maps these onto stable exit codes
// (see tools/): config -> 2, data/format/length -> 3, numeric -> 4.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix/model dimension disagreement.
struct ShapeError : Error {
    using Error::Error;
};

/// Invalid argument value (bad range, empty input, ...).
struct ArgumentError : Error {
    using Error::Error;
};

/// Row/column index out of range.
struct IndexError : Error {
    using Error::Error;
};

/// An operation produced or received a non-finite value.
struct NumericError : Error {
    using Error::Error;
};

/// Malformed input file (wrong magic, bad structure).
struct FormatError : Error {
    using Error::Error;
};

/// Input file shorter/longer than its header declares.
struct LengthError : Error {
    using Error::Error;
};

/// Class label outside the declared range.
struct LabelError : Error {
    using Error::Error;
};

/// Forward cache does not match the model/batch handed to backward.
struct CacheError : Error {
    using Error::Error;
};

/// Layer specs that do not chain or violate activation placement.
struct SpecError : Error {
    using Error::Error;
};

/// Experiment config file problems (unknown key, bad value, missing field).
struct ConfigError : Error {
    using Error::Error;
};

/// Dataset could not be resolved or loaded.
struct DataError : Error {
    using Error::Error;
};

} // namespace wf

#endif // WF_ERRORS_HPP
