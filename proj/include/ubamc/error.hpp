#ifndef UBAMC_ERROR_HPP
#define UBAMC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ubamc {

// Malformed document, undeclared identifier, non-stochastic chain, ...
class InvalidInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised by the pipeline when the automaton admits two accepting runs on a word.
class AmbiguousAutomaton : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Rank decision inside the ambiguity band, residual check failure, ...
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An algorithmic bound was exceeded. Indicates non-UBA input or a bug.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace ubamc

#endif  // UBAMC_ERROR_HPP
