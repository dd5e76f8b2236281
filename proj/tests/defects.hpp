#pragma once

#include "optdual/scenario.hpp"

#include <string>
#include <vector>

namespace optdual::test {

struct Defect
{
  std::string name;
  std::string check; // the check expected to fail, or "scenario-valid"
  std::string text;
};

/// Five planted defects on a random scenario with at least two atoms and T >= 1.
inline auto planted_defects(Scenario const &s) -> std::vector<Defect>
{
  int const            n = s.space.atom_count(), T = s.space.horizon();
  nlohmann::json const base = to_json(s);
  std::vector<Defect>  out;
  std::vector<double>  spike(static_cast<std::size_t>(n), 0.0);
  spike[0] = 1.0;

  {
    auto j = base;
    j["measures"]["mu"]["u"][0] = spike;
    out.push_back({"non-optional u", "mhat", j.dump()});
  }
  {
    auto j = base;
    j["measures"]["mu"]["utilde"][0] = spike;
    out.push_back({"non-predictable utilde", "mhat", j.dump()});
  }
  {
    auto                     j = base;
    nlohmann::json           singletons = nlohmann::json::array();
    for (auto const &a : s.space.atoms()) { singletons.push_back(std::vector<std::string>{a}); }
    j["space"]["filtration"][0] = singletons;
    j["space"]["filtration"][1] = nlohmann::json::array({s.space.atoms()});
    out.push_back({"non-refining filtration", "scenario-valid", j.dump()});
  }
  {
    auto       j     = base;
    auto const block = s.space.partition(T).block_of[0];
    for (int a = 0; a < n; ++a) {
      if (s.space.partition(T).block_of[static_cast<std::size_t>(a)] == block) {
        j["processes"]["m"]["values"][T][a] = j["processes"]["m"]["values"][T][a].get<double>() + 1.0;
      }
    }
    out.push_back({"broken martingale", "martingale", j.dump()});
  }
  {
    auto j = base;
    for (int a = 0; a < n; ++a) {
      j["processes"]["z"]["decomposition"]["A"][1][a] = j["processes"]["z"]["decomposition"]["A"][1][a].get<double>() + 0.5;
    }
    out.push_back({"perturbed decomposition", "doob", j.dump()});
  }
  return out;
}

} // namespace optdual::test
