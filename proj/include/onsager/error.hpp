#pragma once

#include <stdexcept>
#include <string>

namespace onsager {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable field file.
class FormatError : public Error {
public:
    enum class Kind { Io, BadMagic, VersionMismatch, Truncated, NonFinite, BadHeader };

    FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Analysis ran but a convergence / validation requirement was not met.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace onsager
