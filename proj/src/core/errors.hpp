// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gkd {

// Exception hierarchy of the core library. The C API maps each type onto a
// status code; everything else surfaces as an internal error.

/// A precondition on an argument was violated.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A configuration failed validation; `field()` names the offending key.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An adaptive scheme exhausted its evaluation budget before meeting tolerance.
class NonConvergedQuadrature : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two profiles or tables live on incompatible grids.
class GridMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gkd
