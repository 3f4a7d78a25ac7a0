#pragma once

#include <stdexcept>
#include <string>

namespace deap {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value or otherwise diverged.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A file did not match the expected container layout or schema.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

}  // namespace deap
