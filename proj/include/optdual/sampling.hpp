#pragma once

#include "optdual/filtered_space.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace optdual {

using Rng = std::mt19937_64;

/// Seed derived from a base seed and a label, so independent checks draw
/// independent but reproducible streams.
auto derive_seed(std::uint64_t base, std::string_view label) -> std::uint64_t;

/// Random variable with a mix of shapes: Gaussian, heavy-tailed, sparse, and
/// with ties. Values are bounded so that all norms stay well conditioned.
auto random_randvar(Rng &rng, int atoms) -> RandVar;
auto random_nonnegative(Rng &rng, int atoms) -> RandVar;
/// Raw (not necessarily adapted) process with `atoms` rows and `T+1` columns.
auto random_process(Rng &rng, int atoms, int horizon) -> Process;
/// Adapted process: column t is made F_t-measurable by block averaging.
auto random_adapted(Rng &rng, FilteredSpace const &space) -> Process;
/// Martingale t -> E[xi | F_t] for a random terminal xi.
auto random_martingale(Rng &rng, FilteredSpace const &space) -> Process;
/// Adapted supermartingale: a martingale minus a random nondecreasing predictable drift.
auto random_supermartingale(Rng &rng, FilteredSpace const &space) -> Process;

} // namespace optdual
