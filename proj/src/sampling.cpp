#include "optdual/sampling.hpp"

#include <cmath>

namespace optdual {

auto derive_seed(std::uint64_t base, std::string_view label) -> std::uint64_t
{
  // splitmix64 over the label bytes
  std::uint64_t h = base ^ 0x9e3779b97f4a7c15ULL;
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (unsigned char c : label) { h = mix(h + c + 0x9e3779b97f4a7c15ULL); }
  return mix(h);
}

auto random_randvar(Rng &rng, int atoms) -> RandVar
{
  std::uniform_int_distribution<int>     shape(0, 3);
  std::normal_distribution<double>       normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandVar xi(atoms);
  switch (shape(rng)) {
  case 0:
    for (int i = 0; i < atoms; ++i) { xi[i] = normal(rng); }
    break;
  case 1: // heavy right tail
    for (int i = 0; i < atoms; ++i) { xi[i] = std::exp(1.5 * normal(rng)) * (unit(rng) < 0.3 ? -1.0 : 1.0); }
    break;
  case 2: // sparse
    for (int i = 0; i < atoms; ++i) { xi[i] = unit(rng) < 0.35 ? 3.0 * normal(rng) : 0.0; }
    break;
  default: // integer-valued with ties
    for (int i = 0; i < atoms; ++i) { xi[i] = std::round(4.0 * normal(rng)); }
    break;
  }
  return xi;
}

auto random_nonnegative(Rng &rng, int atoms) -> RandVar { return random_randvar(rng, atoms).cwiseAbs(); }

auto random_process(Rng &rng, int atoms, int horizon) -> Process
{
  Process y(atoms, horizon + 1);
  for (int t = 0; t <= horizon; ++t) { y.col(t) = random_randvar(rng, atoms); }
  return y;
}

auto random_adapted(Rng &rng, FilteredSpace const &space) -> Process
{
  Process y = random_process(rng, space.atom_count(), space.horizon());
  for (int t = 0; t <= space.horizon(); ++t) { y.col(t) = cond_exp(space, y.col(t), t); }
  return y;
}

auto random_martingale(Rng &rng, FilteredSpace const &space) -> Process
{
  RandVar const xi = random_randvar(rng, space.atom_count());
  Process       m(space.atom_count(), space.horizon() + 1);
  for (int t = 0; t <= space.horizon(); ++t) { m.col(t) = cond_exp(space, xi, t); }
  return m;
}

auto random_supermartingale(Rng &rng, FilteredSpace const &space) -> Process
{
  Process z = random_martingale(rng, space);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandVar drift = RandVar::Zero(space.atom_count());
  for (int t = 1; t <= space.horizon(); ++t) {
    RandVar step(space.atom_count());
    for (int i = 0; i < space.atom_count(); ++i) { step[i] = unit(rng); }
    drift += cond_exp(space, step, t - 1);
    z.col(t) -= drift;
  }
  return z;
}

} // namespace optdual
