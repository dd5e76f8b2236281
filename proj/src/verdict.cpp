#include "optdual/verdict.hpp"

#include <cmath>
#include <stdexcept>

namespace optdual {

auto to_string(Status s) -> std::string_view
{
  switch (s) {
  case Status::pass: return "pass";
  case Status::fail: return "fail";
  case Status::finding: return "finding";
  case Status::skipped: return "skipped";
  }
  return "?";
}

auto status_from_string(std::string_view s) -> Status
{
  if (s == "pass") { return Status::pass; }
  if (s == "fail") { return Status::fail; }
  if (s == "finding") { return Status::finding; }
  if (s == "skipped") { return Status::skipped; }
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

auto to_string(MarginKind k) -> std::string_view
{
  switch (k) {
  case MarginKind::discrepancy: return "discrepancy";
  case MarginKind::slack: return "slack";
  case MarginKind::estimate: return "estimate";
  }
  return "?";
}

auto identity_verdict(std::string name, double discrepancy, double tol, nlohmann::json witness) -> Verdict
{
  Verdict v;
  v.name    = std::move(name);
  v.kind    = MarginKind::discrepancy;
  v.margin  = discrepancy;
  v.status  = (std::isfinite(discrepancy) && discrepancy <= tol) ? Status::pass : Status::fail;
  v.witness = std::move(witness);
  return v;
}

auto inequality_verdict(std::string name, double slack, double tol, nlohmann::json witness, Status on_violation)
  -> Verdict
{
  Verdict v;
  v.name    = std::move(name);
  v.kind    = MarginKind::slack;
  v.margin  = slack;
  v.status  = (std::isfinite(slack) && slack >= -tol) ? Status::pass : on_violation;
  v.witness = std::move(witness);
  return v;
}

auto to_json(Verdict const &v) -> nlohmann::json
{
  nlohmann::json j{{"name", v.name},
                   {"status", to_string(v.status)},
                   {"margin_kind", to_string(v.kind)},
                   {"margin", v.margin}};
  if (!v.witness.is_null()) { j["witness"] = v.witness; }
  if (!v.note.empty()) { j["note"] = v.note; }
  return j;
}

} // namespace optdual
