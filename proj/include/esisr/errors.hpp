#pragma once

#include <stdexcept>
#include <string>

namespace esisr {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an API precondition (shape mismatch, bad argument,
/// wrong colorspace tag, out-of-bounds rectangle).
class ContractError : public Error {
public:
    using Error::Error;
};

/// File content is malformed or unsupported (bad magic, wrong element
/// count, version mismatch, truncated blob).
class FormatError : public Error {
public:
    using Error::Error;
};

/// OS-level read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// A score-set protocol cannot be satisfied (e.g. no mated pairs exist).
class ProtocolError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

} // namespace detail

} // namespace esisr
