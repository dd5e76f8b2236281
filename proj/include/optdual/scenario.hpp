#pragma once

#include "optdual/measures.hpp"
#include "optdual/norms.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

namespace optdual {

struct ClaimedDecomposition
{
  Process M;
  Process A;
};

/// A named process with the properties its author asserts about it.
struct ScenarioProcess
{
  Process                             values;
  bool                                adapted    = false;
  bool                                martingale = false;
  std::optional<ClaimedDecomposition> decomposition;
};

enum class MeasureClass
{
  raw,
  optional
};

struct ScenarioMeasure
{
  MeasurePair  pair;
  MeasureClass kind = MeasureClass::optional;
};

struct Scenario
{
  FilteredSpace                          space;
  std::map<std::string, ScenarioProcess> processes;
  std::map<std::string, ScenarioMeasure> measures;
  std::map<std::string, SeminormSpec>    norms;
  std::map<std::string, RandVar>         variables;
  std::string                            description;
  std::optional<std::uint64_t>           seed;

  auto process(std::string const &name) const -> ScenarioProcess const &;
  auto measure(std::string const &name) const -> ScenarioMeasure const &;
  auto norm(std::string const &name) const -> SeminormSpec const &;
  auto variable(std::string const &name) const -> RandVar const &;
};

auto spec_from_json(nlohmann::json const &j) -> SeminormSpec;
auto spec_to_json(SeminormSpec const &spec) -> nlohmann::json;

/// Builds and validates a scenario. Matrices are time-major: outer index t,
/// inner index atom order. Throws ValidationError naming the violated invariant.
auto scenario_from_json(nlohmann::json const &j) -> Scenario;
auto to_json(Scenario const &s) -> nlohmann::json;

/// Parses text, rejecting duplicate keys; parse errors carry line and column.
auto parse_scenario(std::string const &text) -> Scenario;
auto load_scenario(std::filesystem::path const &path) -> Scenario;

struct RandomScenarioOptions
{
  int           atoms     = 4;
  int           horizon   = 2;
  std::uint64_t seed      = 1;
  int           branching = 2; // blocks of F_{t+1} merged per block of F_t, at most
  bool          allow_large = false;
};

inline constexpr int kMaxRandomAtoms   = 12;
inline constexpr int kMaxRandomHorizon = 5;

/// Random refining filtration built by merging blocks from the atoms
/// backwards, random positive probabilities, and sample processes, measures,
/// norms and random variables. Deterministic given the options.
auto random_scenario(RandomScenarioOptions const &opt) -> Scenario;

/// Hex SHA-256 of the canonical serialization.
auto sha256_hex(std::string const &bytes) -> std::string;
auto digest(Scenario const &s) -> std::string;

} // namespace optdual
