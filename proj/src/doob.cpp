#include "optdual/doob.hpp"

#include "optdual/duality.hpp"
#include "optdual/errors.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"

#include <fmt/format.h>

#include <limits>

namespace optdual {

auto doob_decompose(FilteredSpace const &space, Process const &Z) -> DoobDecomposition
{
  check_shape(space, Z);
  double const defect = adaptedness_defect(space, Z);
  if (defect > 1e-12) {
    throw ValidationError(fmt::format("Doob decomposition needs an adapted process (defect {:.3g})", defect));
  }
  int const         n = space.atom_count(), T = space.horizon();
  DoobDecomposition d;
  d.A = Process::Zero(n, T + 1);
  for (int s = 1; s <= T; ++s) { d.A.col(s) = d.A.col(s - 1) + cond_exp(space, Z.col(s - 1) - Z.col(s), s - 1); }
  d.M    = Z + d.A;
  d.tv_A = RandVar::Zero(n);
  for (int s = 1; s <= T; ++s) { d.tv_A += (d.A.col(s) - d.A.col(s - 1)).cwiseAbs(); }
  return d;
}

auto decomposition_defects(FilteredSpace const &space, Process const &Z, DoobDecomposition const &d)
  -> DecompositionDefects
{
  check_shape(space, Z);
  check_shape(space, d.M, "M");
  check_shape(space, d.A, "A");
  DecompositionDefects r;
  r.reconstruction = (d.M - d.A - Z).cwiseAbs().maxCoeff();
  r.martingale     = std::max(adaptedness_defect(space, d.M), martingale_defect(space, d.M));
  for (int t = 1; t <= space.horizon(); ++t) {
    r.predictable = std::max(r.predictable, measurability_defect(space, d.A.col(t), space.partition(t - 1)));
  }
  r.predictable = std::max(r.predictable, measurability_defect(space, d.A.col(0), space.partition(0)));
  r.initial     = d.A.col(0).cwiseAbs().maxCoeff();
  Process const rebuilt = d.M - d.A;
  if (adaptedness_defect(space, rebuilt) <= 1e-12) {
    auto const again = doob_decompose(space, rebuilt);
    r.uniqueness     = std::max((again.M - d.M).cwiseAbs().maxCoeff(), (again.A - d.A).cwiseAbs().maxCoeff());
  } else {
    r.uniqueness = std::numeric_limits<double>::infinity();
  }
  return r;
}

namespace {

struct ChainGraph
{
  std::vector<StoppingTime>             times;
  std::vector<std::vector<std::size_t>> next; // strictly later, distinct
};

auto chain_graph(FilteredSpace const &space, double bound) -> ChainGraph
{
  ChainGraph g;
  g.times = enumerate_stopping_times(space, bound);
  g.next.resize(g.times.size());
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    for (std::size_t j = 0; j < g.times.size(); ++j) {
      if (i != j && g.times[i].precedes(g.times[j])) { g.next[i].push_back(j); }
    }
  }
  return g;
}

auto count_chains(ChainGraph const &g, int max_n) -> double
{
  std::vector<double> ending(g.times.size(), 1.0);
  double              total = static_cast<double>(g.times.size());
  for (int k = 1; k <= max_n; ++k) {
    std::vector<double> next(g.times.size(), 0.0);
    for (std::size_t i = 0; i < g.times.size(); ++i) {
      for (auto j : g.next[i]) { next[j] += ending[i]; }
    }
    ending = std::move(next);
    for (double c : ending) { total += c; }
  }
  return total;
}

} // namespace

auto count_variation_chains(FilteredSpace const &space, int max_n, double bound) -> double
{
  return count_chains(chain_graph(space, bound), max_n);
}

auto variation_depth(FilteredSpace const &space, int cap, double budget, double bound) -> int
{
  auto const g     = chain_graph(space, bound);
  int        depth = 0;
  while (depth < cap && count_chains(g, depth + 1) <= budget) { ++depth; }
  return depth;
}

auto var_p(FilteredSpace const &space, SeminormSpec const &spec, Process const &Z, int max_n, double bound)
  -> Variation
{
  check_shape(space, Z);
  if (max_n < 0) { throw std::invalid_argument("max_n must be >= 0"); }
  auto const   g     = chain_graph(space, bound);
  double const count = count_chains(g, max_n);
  if (count > bound) {
    throw EnumerationLimit(fmt::format("too large to enumerate: variation chains number {:.0f}, bound is {:.0f}",
                                       count, bound),
                           bound);
  }
  auto const N = g.times.size();
  std::vector<RandVar>   value_at(N);
  std::vector<Partition> info(N);
  for (std::size_t i = 0; i < N; ++i) {
    value_at[i] = stopped(Z, g.times[i]);
    info[i]     = stopped_partition(space, g.times[i]);
  }

  Variation                best;
  best.value = -1.0;
  std::vector<std::size_t> chain;
  auto visit = [&](auto &&self, std::size_t i, RandVar const &partial) -> void {
    chain.push_back(i);
    double const v = polar(spec, space, partial + value_at[i].cwiseAbs());
    best.evaluated += 1.0;
    bool const tie = std::abs(v - best.value) <= 1e-12 * (1.0 + std::abs(v)) && chain.size() > best.sequence.size();
    if (v > best.value + 1e-12 * (1.0 + std::abs(v)) || tie) {
      best.sequence.clear();
      for (auto k : chain) { best.sequence.push_back(g.times[k]); }
    }
    best.value = std::max(best.value, v);
    if (static_cast<int>(chain.size()) <= max_n) {
      for (auto j : g.next[i]) {
        self(self, j, partial + cond_exp(space, value_at[i] - value_at[j], info[i]).cwiseAbs());
      }
    }
    chain.pop_back();
  };
  RandVar const zero = RandVar::Zero(space.atom_count());
  for (std::size_t i = 0; i < N; ++i) { visit(visit, i, zero); }
  return best;
}

auto quasimartingale_bound_check(FilteredSpace const &space, SeminormSpec const &spec, Process const &Z, int max_n,
                                 int samples, std::uint64_t seed, double tol, double bound) -> std::vector<Verdict>
{
  auto const   d    = doob_decompose(space, Z);
  auto const   var  = var_p(space, spec, Z, max_n, bound);
  int const    n    = space.atom_count(), T = space.horizon();
  RandVar const MT  = d.M.col(T).cwiseAbs();
  double const joint = polar(spec, space, 2.0 * d.tv_A + MT);
  double const split = polar(spec, space, 2.0 * d.tv_A) + polar(spec, space, MT);
  Status const on_violation = spec.is_spectral() ? Status::finding : Status::fail;

  nlohmann::json seq = nlohmann::json::array();
  for (auto const &tau : var.sequence) { seq.push_back(tau.times()); }
  std::vector<Verdict> out;
  out.push_back(inequality_verdict("var-bound", joint - var.value, tol,
                                   {{"var", var.value}, {"bound", joint}, {"sequence", seq}}, on_violation));
  out.push_back(inequality_verdict("var-bound-split", split - joint, tol, {{"joint", joint}, {"split", split}}));

  // l(y) <= p_D(y) Var_p(Z) for simple processes y over stopping chains from 0
  auto const times = enumerate_stopping_times(space, bound);
  std::vector<std::vector<std::size_t>> next(times.size());
  std::size_t                           start = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] == StoppingTime::constant(space, 0)) { start = i; }
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (i != j && times[i].precedes(times[j])) { next[i].push_back(j); }
    }
  }
  Rng                                rng(seed);
  std::uniform_int_distribution<int> length(0, max_n);
  double                             worst = std::numeric_limits<double>::infinity();
  nlohmann::json                     witness;
  for (int s = 0; s < samples; ++s) {
    std::vector<std::size_t> chain{start};
    int const                want = length(rng);
    while (static_cast<int>(chain.size()) <= want && !next[chain.back()].empty()) {
      auto const &opts = next[chain.back()];
      chain.push_back(opts[std::uniform_int_distribution<std::size_t>(0, opts.size() - 1)(rng)]);
    }
    std::vector<RandVar> eta;
    for (auto i : chain) { eta.push_back(cond_exp_at(space, random_randvar(rng, n), times[i])); }
    Process y = Process::Zero(n, T + 1);
    for (int a = 0; a < n; ++a) {
      for (int t = 0; t <= T; ++t) {
        for (std::size_t k = 0; k < chain.size(); ++k) {
          if (times[chain[k]](a) <= t) { y(a, t) = eta[k][a]; }
        }
      }
    }
    double l = 0.0;
    for (std::size_t k = 0; k < chain.size(); ++k) {
      RandVar const here = stopped(Z, times[chain[k]]);
      RandVar const mass = k + 1 < chain.size()
                             ? cond_exp_at(space, here - stopped(Z, times[chain[k + 1]]), times[chain[k]])
                             : cond_exp_at(space, here, times[chain[k]]);
      l += space.expectation(stopped(y, times[chain[k]]).cwiseProduct(mass));
    }
    double const pd    = has_quotient_program(spec) ? quotient_norm(space, spec, y).value
                                                    : seminorm(spec, space, sup_norm(y));
    double const slack = pd * var.value - l;
    if (slack < worst) {
      nlohmann::json taus = nlohmann::json::array();
      for (auto i : chain) { taus.push_back(times[i].times()); }
      worst   = slack;
      witness = {{"l", l}, {"p_D", pd}, {"chain", taus}};
    }
  }
  if (samples > 0) {
    auto v = inequality_verdict("functional-bound", worst, tol, witness);
    if (!has_quotient_program(spec)) { v.note = "p_D bounded above by p(||y||)"; }
    out.push_back(v);
  }
  return out;
}

auto polar_jensen_check(FilteredSpace const &space, SeminormSpec const &spec, int samples, std::uint64_t seed,
                        double tol, double bound) -> Verdict
{
  auto const     times = enumerate_stopping_times(space, bound);
  Rng            rng(seed);
  double         worst = std::numeric_limits<double>::infinity();
  nlohmann::json witness;
  for (int s = 0; s < samples; ++s) {
    RandVar const eta  = random_randvar(rng, space.atom_count());
    double const  full = polar(spec, space, eta);
    for (auto const &tau : times) {
      double const slack = full - polar(spec, space, cond_exp_at(space, eta, tau));
      if (slack < worst) {
        worst   = slack;
        witness = {{"eta", std::vector<double>(eta.data(), eta.data() + eta.size())}, {"tau", tau.times()}};
      }
    }
  }
  return inequality_verdict("polar-jensen", worst, tol, witness, spec.is_spectral() ? Status::finding : Status::fail);
}

} // namespace optdual
