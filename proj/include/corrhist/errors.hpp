#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace corrhist {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed markup or a value that does not parse. Carries the byte offset
/// (in the decompressed stream) where the problem was detected.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), message_(what), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }
    /// Description without the offset suffix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::uint64_t offset_;
};

/// Well-formed input whose content violates a model invariant.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// A date was requested that is not an observation time of the history.
class UnobservedTimeError : public Error {
public:
    using Error::Error;
};

/// Snapshot dates not strictly increasing.
class OrderError : public Error {
public:
    using Error::Error;
};

/// A generator plan or edit that cannot be applied to the current state.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

}  // namespace corrhist
