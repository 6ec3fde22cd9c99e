#pragma once

#include <stdexcept>
#include <string>

namespace rmot {

// Malformed text input (bad numeric field, bad row layout). Carries the 1-based line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Binary container violations: wrong magic/tag, truncated payload.
class FormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or scene/sequence description.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition violation on an operation argument.
class DomainError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace rmot
