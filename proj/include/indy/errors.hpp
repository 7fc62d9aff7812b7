#pragma once

#include <stdexcept>
#include <string>

namespace indy {

// Error categories used across the library. All carry a human-readable
// message; callers that need to distinguish catch the concrete type.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension/shape mismatch between tensors. Message names both shapes.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Invalid argument value (bad range, empty input, unsupported count).
struct ParamError : Error {
    explicit ParamError(const std::string& msg) : Error(msg) {}
};

// Malformed file contents (dataset lines, checkpoint payloads).
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// A label that no alignment of the given length can produce.
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& msg) : Error(msg) {}
};

// Dataset-level failure (e.g. no usable samples at all).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace indy
