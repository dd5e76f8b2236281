#include "optdual/filtered_space.hpp"

#include "optdual/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace optdual {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

auto limit_error(std::string_view what, double count, double bound) -> EnumerationLimit
{
  return EnumerationLimit(fmt::format("too large to enumerate: {} has {:.0f} candidates, bound is {:.0f}", what,
                                      count, bound),
                          bound);
}

} // namespace

Partition::Partition(int atoms, std::vector<std::vector<int>> list)
  : block_of(static_cast<std::size_t>(atoms), -1)
{
  for (auto &block : list) {
    if (block.empty()) { throw ValidationError("partition has an empty block"); }
    std::ranges::sort(block);
  }
  std::ranges::sort(list, [](auto const &a, auto const &b) { return a.front() < b.front(); });
  for (std::size_t b = 0; b < list.size(); ++b) {
    for (int atom : list[b]) {
      if (atom < 0 || atom >= atoms) {
        throw ValidationError(fmt::format("partition refers to atom {} outside 0..{}", atom, atoms - 1),
                              {{"atom", atom}});
      }
      if (block_of[atom] != -1) {
        throw ValidationError(fmt::format("atom {} appears in two blocks of a partition", atom), {{"atom", atom}});
      }
      block_of[atom] = static_cast<int>(b);
    }
  }
  for (int atom = 0; atom < atoms; ++atom) {
    if (block_of[atom] == -1) {
      throw ValidationError(fmt::format("atom {} is missing from a partition", atom), {{"atom", atom}});
    }
  }
  blocks = std::move(list);
}

auto Partition::discrete(int atoms) -> Partition
{
  std::vector<std::vector<int>> list;
  for (int a = 0; a < atoms; ++a) { list.push_back({a}); }
  return Partition(atoms, std::move(list));
}

auto Partition::trivial(int atoms) -> Partition
{
  std::vector<int> all(static_cast<std::size_t>(atoms));
  std::iota(all.begin(), all.end(), 0);
  return Partition(atoms, {all});
}

auto Partition::refines(Partition const &coarser) const -> bool
{
  if (coarser.atoms() != atoms()) { return false; }
  return std::ranges::all_of(blocks, [&](auto const &block) {
    return std::ranges::all_of(block,
                               [&](int a) { return coarser.block_of[a] == coarser.block_of[block.front()]; });
  });
}

FilteredSpace::FilteredSpace(std::vector<std::string> atoms, std::vector<double> prob,
                             std::vector<Partition> filtration)
  : atoms_(std::move(atoms))
  , filtration_(std::move(filtration))
{
  auto const n = static_cast<int>(atoms_.size());
  if (n == 0) { throw ValidationError("a filtered space needs at least one atom"); }
  if (static_cast<int>(prob.size()) != n) {
    throw ValidationError(fmt::format("{} probabilities given for {} atoms", prob.size(), n));
  }
  for (int i = 0; i < n; ++i) {
    if (!(prob[i] > 0.0) || !std::isfinite(prob[i])) {
      throw ValidationError(fmt::format("probability of atom '{}' must be strictly positive", atoms_[i]),
                            {{"atom", atoms_[i]}, {"prob", prob[i]}});
    }
  }
  double const total = std::accumulate(prob.begin(), prob.end(), 0.0);
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError(fmt::format("probabilities must sum to 1 (sum is {:.15g})", total), {{"sum", total}});
  }
  prob_ = Eigen::Map<RandVar const>(prob.data(), n);

  std::vector<std::string> sorted = atoms_;
  std::ranges::sort(sorted);
  if (auto dup = std::ranges::adjacent_find(sorted); dup != sorted.end()) {
    throw ValidationError(fmt::format("atom label '{}' is not unique", *dup), {{"atom", *dup}});
  }

  if (filtration_.empty()) { throw ValidationError("filtration needs at least one partition (horizon >= 0)"); }
  for (std::size_t t = 0; t < filtration_.size(); ++t) {
    if (filtration_[t].atoms() != n) {
      throw ValidationError(fmt::format("partition at t={} covers {} atoms, space has {}", t,
                                        filtration_[t].atoms(), n),
                            {{"t", t}});
    }
  }
  for (std::size_t t = 0; t + 1 < filtration_.size(); ++t) {
    auto const &fine = filtration_[t + 1];
    for (auto const &block : fine.blocks) {
      for (int a : block) {
        if (filtration_[t].block_of[a] != filtration_[t].block_of[block.front()]) {
          throw ValidationError(
            fmt::format("filtration is not refining: partition at t={} does not refine partition at t={}", t + 1,
                        t),
            {{"t", t + 1}, {"atoms", {atoms_[block.front()], atoms_[a]}}});
        }
      }
    }
  }
}

auto FilteredSpace::partition(int t) const -> Partition const &
{
  if (t < 0 || t > horizon()) {
    throw std::out_of_range(fmt::format("time {} outside 0..{}", t, horizon()));
  }
  return filtration_[t];
}

auto FilteredSpace::block_counts() const -> std::vector<int>
{
  std::vector<int> counts;
  for (auto const &p : filtration_) { counts.push_back(p.size()); }
  return counts;
}

auto FilteredSpace::atom_index(std::string_view label) const -> int
{
  auto it = std::ranges::find(atoms_, label);
  if (it == atoms_.end()) {
    throw ValidationError(fmt::format("unknown atom '{}'", label), {{"atom", std::string(label)}});
  }
  return static_cast<int>(it - atoms_.begin());
}

auto cond_exp(FilteredSpace const &space, RandVar const &xi, Partition const &part) -> RandVar
{
  if (xi.size() != space.atom_count()) {
    throw std::invalid_argument(fmt::format("random variable has {} entries, space has {} atoms", xi.size(),
                                            space.atom_count()));
  }
  RandVar out(xi.size());
  for (auto const &block : part.blocks) {
    double mass = 0.0, sum = 0.0;
    for (int a : block) {
      mass += space.prob(a);
      sum += space.prob(a) * xi[a];
    }
    double const avg = sum / mass;
    for (int a : block) { out[a] = avg; }
  }
  return out;
}

auto cond_exp(FilteredSpace const &space, RandVar const &xi, int t) -> RandVar
{
  return cond_exp(space, xi, space.partition(t));
}

auto measurability_defect(FilteredSpace const &space, RandVar const &xi, Partition const &part) -> double
{
  return (xi - cond_exp(space, xi, part)).cwiseAbs().maxCoeff();
}

auto stopping_time_violation(FilteredSpace const &space, std::vector<int> const &times) -> std::optional<int>
{
  int const T = space.horizon();
  for (int t = 0; t <= T; ++t) {
    auto const &part = space.partition(t);
    for (auto const &block : part.blocks) {
      bool const first = times[block.front()] <= t;
      for (int a : block) {
        if ((times[a] <= t) != first) { return t; }
      }
    }
  }
  return std::nullopt;
}

auto is_predictable_time(FilteredSpace const &space, std::vector<int> const &times) -> bool
{
  int const T = space.horizon();
  for (int t = 0; t <= T; ++t) {
    auto const &part = space.partition(t == 0 ? 0 : t - 1);
    for (auto const &block : part.blocks) {
      bool const first = times[block.front()] == t;
      for (int a : block) {
        if ((times[a] == t) != first) { return false; }
      }
    }
  }
  return true;
}

auto StoppingTime::make(FilteredSpace const &space, std::vector<int> times) -> StoppingTime
{
  if (static_cast<int>(times.size()) != space.atom_count()) {
    throw ValidationError(fmt::format("stopping time has {} values, space has {} atoms", times.size(),
                                      space.atom_count()));
  }
  for (int v : times) {
    if (v < 0 || v > space.horizon()) {
      throw ValidationError(fmt::format("stopping time value {} outside 0..{}", v, space.horizon()),
                            {{"value", v}});
    }
  }
  if (auto t = stopping_time_violation(space, times)) {
    throw ValidationError(fmt::format("not a stopping time: {{tau <= {}}} is not F_{}-measurable", *t, *t),
                          {{"t", *t}});
  }
  bool const pred = is_predictable_time(space, times);
  return StoppingTime(std::move(times), pred);
}

auto StoppingTime::constant(FilteredSpace const &space, int t) -> StoppingTime
{
  return make(space, std::vector<int>(static_cast<std::size_t>(space.atom_count()), t));
}

auto StoppingTime::precedes(StoppingTime const &other) const -> bool
{
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (times_[i] > other.times_[i]) { return false; }
  }
  return true;
}

auto stopped_partition(FilteredSpace const &space, StoppingTime const &tau) -> Partition
{
  std::vector<std::vector<int>> blocks;
  for (int t = 0; t <= space.horizon(); ++t) {
    for (auto const &block : space.partition(t).blocks) {
      std::vector<int> piece;
      for (int a : block) {
        if (tau(a) == t) { piece.push_back(a); }
      }
      if (!piece.empty()) { blocks.push_back(std::move(piece)); }
    }
  }
  return Partition(space.atom_count(), std::move(blocks));
}

auto cond_exp_at(FilteredSpace const &space, RandVar const &xi, StoppingTime const &tau) -> RandVar
{
  return cond_exp(space, xi, stopped_partition(space, tau));
}

namespace {

// Number of ways to stop inside `block` of F_t given that nothing in it has
// stopped before t: stop the whole block now, or defer to its children.
auto count_from(FilteredSpace const &space, int t, std::vector<int> const &block) -> double
{
  if (t == space.horizon()) { return 1.0; }
  auto const &next = space.partition(t + 1);
  std::vector<int> children;
  for (int a : block) {
    int const b = next.block_of[a];
    if (std::ranges::find(children, b) == children.end()) { children.push_back(b); }
  }
  double deferred = 1.0;
  for (int b : children) { deferred *= count_from(space, t + 1, next.blocks[b]); }
  return 1.0 + deferred;
}

void enumerate_from(FilteredSpace const &space, int t, std::vector<int> &times,
                    std::vector<std::vector<int>> &out)
{
  int const T = space.horizon();
  auto const &part = space.partition(t);
  std::vector<int> open;
  for (int b = 0; b < part.size(); ++b) {
    if (times[part.blocks[b].front()] < 0) { open.push_back(b); }
  }
  if (open.empty()) {
    out.push_back(times);
    return;
  }
  if (t == T) {
    for (int b : open) {
      for (int a : part.blocks[b]) { times[a] = T; }
    }
    out.push_back(times);
    for (int b : open) {
      for (int a : part.blocks[b]) { times[a] = -1; }
    }
    return;
  }
  std::size_t const k = open.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (std::size_t{1} << i)) {
        for (int a : part.blocks[open[i]]) { times[a] = t; }
      }
    }
    enumerate_from(space, t + 1, times, out);
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (std::size_t{1} << i)) {
        for (int a : part.blocks[open[i]]) { times[a] = -1; }
      }
    }
  }
}

} // namespace

auto count_stopping_times(FilteredSpace const &space) -> double
{
  double total = 1.0;
  for (auto const &block : space.partition(0).blocks) { total *= count_from(space, 0, block); }
  return total;
}

auto enumerate_stopping_times(FilteredSpace const &space, double bound) -> std::vector<StoppingTime>
{
  double const count = count_stopping_times(space);
  if (count > bound) { throw limit_error("stopping-time enumeration", count, bound); }
  std::vector<std::vector<int>> raw;
  raw.reserve(static_cast<std::size_t>(count));
  std::vector<int> times(static_cast<std::size_t>(space.atom_count()), -1);
  enumerate_from(space, 0, times, raw);
  std::ranges::sort(raw);
  std::vector<StoppingTime> out;
  out.reserve(raw.size());
  for (auto &r : raw) { out.push_back(StoppingTime::make(space, std::move(r))); }
  return out;
}

auto enumerate_stopping_sequences(FilteredSpace const &space, int n, double bound)
  -> std::vector<std::vector<StoppingTime>>
{
  if (n < 0) { throw std::invalid_argument("sequence length index n must be >= 0"); }
  auto const times = enumerate_stopping_times(space, bound);
  auto const N     = times.size();
  std::vector<std::vector<std::size_t>> successors(N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      if (times[i].precedes(times[j])) { successors[i].push_back(j); }
    }
  }
  // chains[i] = number of nondecreasing tuples of the current length starting at i
  std::vector<double> chains(N, 1.0);
  for (int step = 0; step < n; ++step) {
    std::vector<double> next(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      for (auto j : successors[i]) { next[i] += chains[j]; }
    }
    chains = std::move(next);
  }
  double const count = std::accumulate(chains.begin(), chains.end(), 0.0);
  if (count > bound) { throw limit_error("stopping-sequence enumeration", count, bound); }

  std::vector<std::vector<StoppingTime>> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> stack;
  auto extend = [&](auto &&self, std::size_t from) -> void {
    if (static_cast<int>(stack.size()) == n + 1) {
      std::vector<StoppingTime> seq;
      for (auto i : stack) { seq.push_back(times[i]); }
      out.push_back(std::move(seq));
      return;
    }
    for (auto j : successors[from]) {
      stack.push_back(j);
      self(self, j);
      stack.pop_back();
    }
  };
  for (std::size_t i = 0; i < N; ++i) {
    stack.assign(1, i);
    extend(extend, i);
  }
  return out;
}

} // namespace optdual
