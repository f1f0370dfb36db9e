#pragma once

#include <stdexcept>
#include <string>

namespace cfdim {

// Precondition violations on numeric parameters.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A computation would exceed its enumeration or sampling budget.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative method failed to reach its stated tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FeasibilityError : public DomainError {
public:
    using DomainError::DomainError;
};

class InfeasibleParameters : public DomainError {
public:
    using DomainError::DomainError;
};

class EmptyDigitRange : public DomainError {
public:
    using DomainError::DomainError;
};

class NotInTree : public DomainError {
public:
    using DomainError::DomainError;
};

class UndefinedLevel : public DomainError {
public:
    using DomainError::DomainError;
};

class LengthError : public DomainError {
public:
    using DomainError::DomainError;
};

} // namespace cfdim
