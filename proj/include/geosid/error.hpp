#pragma once

#include <stdexcept>
#include <string>

namespace geosid {

enum class ErrorKind {
    validation,  // bad input, violated precondition
    io,          // file missing, unreadable, truncated
};

/// Single exception type thrown by the library. `code()` is a short stable
/// tag (e.g. "EmptyCluster") that tests and the CLI can match on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(ErrorKind::validation, std::move(code), message);
}

[[noreturn]] inline void fail_io(const std::string& message) {
    throw Error(ErrorKind::io, "IoError", message);
}

}  // namespace geosid
