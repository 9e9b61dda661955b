#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, scene description, or operation preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures (open/write/rename).
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file content. Carries the byte offset of the first violation.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// Nonlinear fit failed to converge. Carries the per-iteration trace.
class FitError : public Error {
public:
    FitError(const std::string& what, std::string trace)
        : Error(what), trace_(std::move(trace)) {}

    const std::string& trace() const noexcept { return trace_; }

private:
    std::string trace_;
};

}  // namespace qrng
