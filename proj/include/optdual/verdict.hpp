#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace optdual {

/// Outcome of one verified identity or inequality. A `finding` is a violated
/// inequality whose hypotheses the finite model does not guarantee; a `fail`
/// is a violated statement that must hold unconditionally.
enum class Status
{
  pass,
  fail,
  finding,
  skipped
};

auto to_string(Status s) -> std::string_view;
auto status_from_string(std::string_view s) -> Status;

/// How to read `Verdict::margin`.
enum class MarginKind
{
  /// Largest absolute discrepancy between two sides; 0 is exact.
  discrepancy,
  /// Smallest slack rhs - lhs of an inequality; negative means violated.
  slack,
  /// A fitted or estimated quantity with no sign convention.
  estimate
};

auto to_string(MarginKind k) -> std::string_view;

struct Verdict
{
  std::string    name;
  Status         status = Status::pass;
  MarginKind     kind   = MarginKind::discrepancy;
  double         margin = 0.0;
  nlohmann::json witness;
  std::string    note;
};

/// Helpers for the two standard shapes of check.
auto identity_verdict(std::string name, double discrepancy, double tol, nlohmann::json witness = {}) -> Verdict;
auto inequality_verdict(std::string name, double slack, double tol, nlohmann::json witness = {},
                        Status on_violation = Status::fail) -> Verdict;

auto to_json(Verdict const &v) -> nlohmann::json;

} // namespace optdual
