// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace splat {

// Coarse classification of failures so callers (and the CLI exit-code
// mapping) can tell configuration mistakes from runtime faults.
enum class ErrorKind {
    config,       // bad parameters, invalid request
    schema,       // input file violates its documented layout
    corrupt,      // input file truncated or holds non-finite payload
    bounds,       // index out of range
    contract,     // caller violated an API precondition (shape mismatch etc.)
    numeric,      // non-finite or degenerate numeric input
    capability,   // the object cannot perform the requested operation
    protocol,     // black-box exchange file malformed
    unavailable,  // external party did not respond in time
    io,           // filesystem failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace splat
