#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clpd {

/// Malformed input file or stream. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// API called in the wrong state (e.g. adding to a sealed index).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Input violates an operation's precondition.
class DataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Remote scorer could not be reached or answered badly.
class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& what, std::vector<long long> failed_ids = {})
        : std::runtime_error(what), failed_ids_(std::move(failed_ids)) {}

    const std::vector<long long>& failed_ids() const noexcept { return failed_ids_; }

private:
    std::vector<long long> failed_ids_;
};

}  // namespace clpd
