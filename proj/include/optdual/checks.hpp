#pragma once

#include "optdual/scenario.hpp"
#include "optdual/verdict.hpp"

#include <optional>
#include <string>
#include <vector>

namespace optdual {

struct VerifyOptions
{
  std::vector<std::string> checks;      // empty runs every check
  std::optional<double>    tol;         // overrides every per-check tolerance
  std::uint64_t            seed    = 1;
  int                      samples = 20;
  double                   bound   = kDefaultEnumerationBound;
  double                   variation_budget = 2e4; // chains per var_p evaluation
};

struct CheckRecord
{
  std::string          check;
  std::string          instance;
  Status               status = Status::pass;
  MarginKind           kind   = MarginKind::discrepancy;
  double               margin = 0.0;
  nlohmann::json       witness;
  std::string          note;
  std::vector<Verdict> items;
  double               runtime_ms = 0.0;
};

struct Report
{
  std::string              instance;
  std::vector<CheckRecord> records; // sorted by check id

  auto status() const -> Status;
  /// 0 when nothing failed, 1 otherwise. Findings do not fail a run.
  auto exit_code() const -> int;
  auto find(std::string_view check) const -> CheckRecord const *;
};

struct CheckInfo
{
  std::string id;
  std::string summary;
};

auto list_checks() -> std::vector<CheckInfo>;

/// Runs the selected checks. Throws std::invalid_argument on an unknown id.
auto verify(Scenario const &scenario, VerifyOptions const &opt) -> Report;

/// Parses and verifies. An invalid scenario yields a single failing
/// "scenario-valid" record whose witness names the violated invariant.
auto verify_text(std::string const &text, VerifyOptions const &opt) -> Report;

auto to_json(CheckRecord const &r, bool with_runtime = true) -> nlohmann::json;
auto to_json(Report const &r, bool with_runtime = true) -> nlohmann::json;
auto to_markdown(Report const &r) -> std::string;
/// SHA-256 of the report without runtime fields.
auto report_digest(Report const &r) -> std::string;

} // namespace optdual
