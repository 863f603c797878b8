#pragma once

#include <stdexcept>
#include <string>

namespace accim {

// Argument outside the domain of an operation (point outside [0,1], offset outside a cell).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The open system has no usable surviving set.
class DegenerateSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition that the construction relies on does not hold.
class HypothesisFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// All mass escaped: |f|_1 = 0.
class TotalEscapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough samples to resolve the requested statistic.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Hole family violates nesting or endpoint conditions.
class FamilyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg, int line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace accim
