#pragma once

#include <stdexcept>
#include <string>

namespace mmbeam {

/// Bad or inconsistent configuration detected before a run starts.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violated an operation's precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Internal bookkeeping went wrong; the run cannot continue.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace mmbeam
