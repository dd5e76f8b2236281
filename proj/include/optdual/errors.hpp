#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

namespace optdual {

/// Raised when an object violates one of its construction invariants.
/// `witness` names the offending piece (time index, atoms, ...) so that
/// reports can show where the violation sits.
class ValidationError : public std::invalid_argument
{
public:
  ValidationError(std::string const &what, nlohmann::json witness = {})
    : std::invalid_argument(what)
    , witness_(std::move(witness))
  {
  }

  auto witness() const -> nlohmann::json const & { return witness_; }

private:
  nlohmann::json witness_;
};

/// An exhaustive enumeration would exceed its configured bound.
class EnumerationLimit : public std::runtime_error
{
public:
  EnumerationLimit(std::string const &what, double bound)
    : std::runtime_error(what)
    , bound_(bound)
  {
  }

  auto bound() const -> double { return bound_; }

private:
  double bound_;
};

/// The LP solver did not reach optimality.
class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace optdual
