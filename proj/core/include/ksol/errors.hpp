#pragma once

#include <stdexcept>
#include <string>

namespace ksol {

// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Soliton parameters violating a stated constraint.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Operation requested in a regime where it has no meaning.
class NotApplicable : public std::logic_error {
public:
    explicit NotApplicable(const std::string& what) : std::logic_error(what) {}
};

class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ksol
