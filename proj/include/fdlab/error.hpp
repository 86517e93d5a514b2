#pragma once

#include <stdexcept>
#include <string>

namespace fdlab {

// Bad arguments: out-of-range delta, malformed words, scales outside a census window.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested computation exceeds a hard budget (depth, enumeration size, frequency).
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Grid or bin resolution too coarse for the requested frequency.
class ResolutionError : public DomainError {
public:
    explicit ResolutionError(const std::string& what) : DomainError(what) {}
};

// A fit or census was asked for with too few usable samples.
class InsufficientRangeError : public DomainError {
public:
    explicit InsufficientRangeError(const std::string& what) : DomainError(what) {}
};

} // namespace fdlab
