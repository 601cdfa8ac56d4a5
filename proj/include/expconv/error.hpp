#pragma once

#include <stdexcept>
#include <string>

namespace expconv {

/// Precondition or parameter validation failure. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A derivative oracle could not produce a value (e.g. ρ^q at ρ ≤ 0).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A hard mathematical invariant failed on a computed value.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace expconv
