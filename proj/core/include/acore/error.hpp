#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acore {

/// Precondition on a parameter point, region or probability was violated.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A classifier or regressor could not be fitted to the supplied data.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration or serialized artifact. Carries the 1-based line
/// number when the problem can be attributed to one.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace acore
