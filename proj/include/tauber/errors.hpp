#pragma once

#include <stdexcept>
#include <string>

namespace tauber {

/// Argument outside the mathematical domain of an operation (e.g. t < f(0) for an inverse).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent or invalid construction parameters.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation requested at (or numerically on top of) a pole.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Sampling too coarse for the requested numerical estimate.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tauber
