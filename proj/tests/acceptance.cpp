#include "optdual/checks.hpp"
#include "optdual/doob.hpp"
#include "optdual/duality.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"
#include "defects.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

using namespace optdual;

namespace {

constexpr int    kScenarios = 100;
constexpr int    kAtoms     = 8;
constexpr int    kHorizon   = 4;
constexpr double kInf       = std::numeric_limits<double>::infinity();

struct Outcome
{
  bool        pass = true;
  std::string detail;
};

auto batch() -> std::vector<Scenario> const &
{
  static std::vector<Scenario> const all = [] {
    std::vector<Scenario> out;
    for (int s = 1; s <= kScenarios; ++s) {
      out.push_back(random_scenario({kAtoms, kHorizon, static_cast<std::uint64_t>(s), 2, false}));
    }
    return out;
  }();
  return all;
}

// block averages straight from the partition
auto block_average(FilteredSpace const &s, RandVar const &x, Partition const &part) -> RandVar
{
  RandVar out(x.size());
  for (auto const &block : part.blocks) {
    double num = 0.0, den = 0.0;
    for (int a : block) {
      num += s.prob(a) * x[a];
      den += s.prob(a);
    }
    for (int a : block) { out[a] = num / den; }
  }
  return out;
}

auto oracle_optional(FilteredSpace const &s, Process const &y) -> Process
{
  Process out(y.rows(), y.cols());
  for (int t = 0; t < y.cols(); ++t) { out.col(t) = block_average(s, y.col(t), s.partition(t)); }
  return out;
}

auto oracle_left_limit(Process const &y) -> Process
{
  Process out = Process::Zero(y.rows(), y.cols());
  out.col(0)  = y.col(0);
  for (int t = 1; t < y.cols(); ++t) { out.col(t) = y.col(t - 1); }
  return out;
}

auto oracle_predictable(FilteredSpace const &s, Process const &y) -> Process
{
  Process out(y.rows(), y.cols());
  out.col(0) = block_average(s, y.col(0), s.partition(0));
  for (int t = 1; t < y.cols(); ++t) { out.col(t) = block_average(s, y.col(t), s.partition(t - 1)); }
  return out;
}

auto oracle_pairing(FilteredSpace const &s, Process const &y, MeasurePair const &m) -> double
{
  double acc = 0.0;
  for (int a = 0; a < y.rows(); ++a) {
    for (int t = 0; t < y.cols(); ++t) {
      acc += s.prob(a) * y(a, t) * m.u(a, t);
      if (t >= 1) { acc += s.prob(a) * y(a, t - 1) * m.utilde(a, t - 1); }
    }
  }
  return acc;
}

auto minimize_scalar(std::function<double(double)> const &f, double lo, double hi) -> double
{
  int const steps = 400;
  double    best  = lo, best_v = f(lo);
  for (int i = 1; i <= steps; ++i) {
    double const x = lo + (hi - lo) * i / steps;
    double const v = f(x);
    if (v < best_v) {
      best   = x;
      best_v = v;
    }
  }
  double       a = std::max(lo, best - (hi - lo) / steps), b = std::min(hi, best + (hi - lo) / steps);
  double const g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    double const c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return std::min(best_v, f(0.5 * (a + b)));
}

// ||eta||_{Phi*} = inf { beta : E Phi*(|eta| / beta) <= 1 }
auto oracle_conjugate_luxemburg(FilteredSpace const &s, YoungFunction const &phi, RandVar const &eta) -> double
{
  auto load = [&](double beta) {
    double acc = 0.0;
    for (int a = 0; a < eta.size(); ++a) { acc += s.prob(a) * phi.conjugate(std::abs(eta[a]) / beta); }
    return acc;
  };
  double lo = 0.0, hi = 1.0;
  while (load(hi) > 1.0) { hi *= 2.0; }
  for (int i = 0; i < 200; ++i) {
    double const mid = 0.5 * (lo + hi);
    (load(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

// dual of the Luxemburg norm: inf over k > 0 of (1 + E Phi*(k |eta|)) / k, minimized over log k
auto oracle_orlicz_polar(FilteredSpace const &s, YoungFunction const &phi, RandVar const &eta) -> double
{
  double const top = eta.cwiseAbs().maxCoeff();
  if (top == 0.0) { return 0.0; }
  auto f = [&](double logk) {
    double const k   = std::exp(logk);
    double       acc = 1.0;
    for (int a = 0; a < eta.size(); ++a) { acc += s.prob(a) * phi.conjugate(k * std::abs(eta[a])); }
    return acc / k;
  };
  double const centre = -std::log(top);
  return minimize_scalar(f, centre - 12.0, centre + 12.0);
}

// int_0^inf g(P(eta > x)) dx with g(s) = s^(1 - gamma)
auto oracle_choquet(FilteredSpace const &s, RandVar const &eta, double gamma) -> double
{
  std::vector<int> order(static_cast<std::size_t>(eta.size()));
  std::iota(order.begin(), order.end(), 0);
  std::ranges::sort(order, [&](int a, int b) { return eta[a] < eta[b]; });
  double acc = 0.0, prev = 0.0, mass = 1.0;
  for (int a : order) {
    acc += (eta[a] - prev) * std::pow(std::max(mass, 0.0), 1.0 - gamma);
    prev = eta[a];
    mass -= s.prob(a);
  }
  return acc;
}

// conditional expectation on F_tau from the blocks of F_t restricted to {tau = t}
auto oracle_at(FilteredSpace const &s, RandVar const &x, StoppingTime const &tau) -> RandVar
{
  RandVar out(x.size());
  for (int a = 0; a < x.size(); ++a) {
    int const t   = tau(a);
    auto const &part = s.partition(t);
    double num = 0.0, den = 0.0;
    for (int b = 0; b < x.size(); ++b) {
      if (tau(b) == t && part.block_of[static_cast<std::size_t>(b)] == part.block_of[static_cast<std::size_t>(a)]) {
        num += s.prob(b) * x[b];
        den += s.prob(b);
      }
    }
    out[a] = num / den;
  }
  return out;
}

auto oracle_lp_polar(FilteredSpace const &s, RandVar const &x, double p) -> double
{
  if (p == 1.0) {
    double top = 0.0;
    for (int a = 0; a < x.size(); ++a) {
      if (s.prob(a) > 0.0) { top = std::max(top, std::abs(x[a])); }
    }
    return top;
  }
  double const q   = p / (p - 1.0);
  double       acc = 0.0;
  for (int a = 0; a < x.size(); ++a) { acc += s.prob(a) * std::pow(std::abs(x[a]), q); }
  return std::pow(acc, 1.0 / q);
}

auto oracle_chain_value(FilteredSpace const &s, Process const &z, std::vector<StoppingTime> const &seq, double p) -> double
{
  auto at = [&](StoppingTime const &tau) {
    RandVar v(z.rows());
    for (int a = 0; a < z.rows(); ++a) { v[a] = z(a, tau(a)); }
    return v;
  };
  RandVar acc = at(seq.back()).cwiseAbs();
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) { acc += oracle_at(s, at(seq[i]) - at(seq[i + 1]), seq[i]).cwiseAbs(); }
  return oracle_lp_polar(s, acc, p);
}

auto family_specs() -> std::vector<std::pair<std::string, SeminormSpec>>
{
  return {{"lp1", SeminormSpec::lp(1)},
          {"lp2", SeminormSpec::lp(2)},
          {"lp3", SeminormSpec::lp(3)},
          {"lpinf", SeminormSpec::lp(kInf)},
          {"orlicz-power2", SeminormSpec::orlicz(YoungFunction::power(2))},
          {"orlicz-exp", SeminormSpec::orlicz(YoungFunction::exponential())},
          {"spectral0.3", SeminormSpec::spectral(0.3)},
          {"spectral0.5", SeminormSpec::spectral(0.5)},
          {"spectral0.8", SeminormSpec::spectral(0.8)}};
}

auto random_pair(Rng &rng, FilteredSpace const &s) -> MeasurePair
{
  MeasurePair m = MeasurePair::zero(s);
  m.u           = random_process(rng, s.atom_count(), s.horizon());
  m.utilde      = random_process(rng, s.atom_count(), s.horizon() - 1);
  return m;
}

auto criterion_left_limit() -> Outcome
{
  double worst = 0.0, oracle_gap = 0.0;
  int    count = 0;
  for (auto const &sc : batch()) {
    Rng rng(derive_seed(*sc.seed, "left-limit"));
    for (int k = 0; k < 10; ++k) {
      Process const y   = random_process(rng, kAtoms, sc.space.horizon());
      Process const lhs = left_limit(optional_projection(sc.space, y));
      Process const rhs = predictable_projection(sc.space, left_limit(y));
      worst             = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
      Process const o1  = oracle_left_limit(oracle_optional(sc.space, y));
      Process const o2  = oracle_predictable(sc.space, oracle_left_limit(y));
      oracle_gap = std::max({oracle_gap, (o1 - lhs).cwiseAbs().maxCoeff(), (o2 - rhs).cwiseAbs().maxCoeff()});
      ++count;
    }
  }
  return {worst <= 1e-12 && oracle_gap <= 1e-12,
          fmt::format("{} processes, worst discrepancy {:.2e}, library vs block-average oracle {:.2e}", count, worst,
                      oracle_gap)};
}

auto criterion_cs() -> Outcome
{
  double      worst = kInf;
  std::string where;
  int         count = 0;
  for (auto const &sc : batch()) {
    Rng rng(derive_seed(*sc.seed, "cs"));
    for (int k = 0; k < 4; ++k) {
      Process const     y = random_process(rng, kAtoms, sc.space.horizon());
      MeasurePair const m = random_pair(rng, sc.space);
      RandVar const     tv = m.u.cwiseAbs().rowwise().sum() + m.utilde.cwiseAbs().rowwise().sum();
      double const      lhs = oracle_pairing(sc.space, y, m);
      for (auto const &[label, spec] : family_specs()) {
        double const slack = seminorm(spec, sc.space, y.cwiseAbs().rowwise().maxCoeff()) * polar(spec, sc.space, tv) - lhs;
        double const lib   = cs_slack(sc.space, spec, y, m);
        double const s     = std::min(slack, lib);
        ++count;
        if (s < worst) {
          worst = s;
          where = fmt::format("{} seed {}", label, *sc.seed);
        }
      }
    }
  }
  return {worst >= -1e-9, fmt::format("{} instances over Lp, Orlicz and spectral, worst slack {:.3g} ({})", count, worst, where)};
}

auto criterion_orlicz() -> Outcome
{
  double lower = kInf, upper = kInf, conj_gap = 0.0, polar_gap = 0.0;
  Rng    rng(derive_seed(1, "orlicz"));
  for (auto const &[label, phi] : {std::pair{"power2", YoungFunction::power(2)}, std::pair{"exp", YoungFunction::exponential()}}) {
    auto const spec = SeminormSpec::orlicz(phi);
    for (int k = 0; k < 200; ++k) {
      auto const   &space = batch()[static_cast<std::size_t>(k % kScenarios)].space;
      RandVar const eta   = random_randvar(rng, kAtoms);
      double const  conj  = conjugate_luxemburg(phi, space, eta);
      double const  pol   = polar(spec, space, eta);
      double const  oconj = oracle_conjugate_luxemburg(space, phi, eta);
      double const  opol  = oracle_orlicz_polar(space, phi, eta);
      conj_gap            = std::max(conj_gap, std::abs(conj - oconj) / (1.0 + oconj));
      polar_gap           = std::max(polar_gap, std::abs(pol - opol) / (1.0 + opol));
      lower               = std::min({lower, pol - conj, opol - oconj});
      upper               = std::min({upper, 2.0 * conj - pol, 2.0 * oconj - opol});
    }
  }
  bool const ok = lower >= -1e-8 && upper >= -1e-8 && conj_gap <= 1e-8 && polar_gap <= 1e-8;
  return {ok, fmt::format("400 eta, lower slack {:.3g}, upper slack {:.3g}, oracle gaps conj {:.2e} polar {:.2e}", lower,
                          upper, conj_gap, polar_gap)};
}

auto criterion_choquet() -> Outcome
{
  double identity = 0.0, oracle = 0.0, additivity = 0.0;
  Rng    rng(derive_seed(1, "choquet"));
  for (double gamma : {0.3, 0.5, 0.8}) {
    auto const spec = SeminormSpec::spectral(gamma);
    auto const sig  = Distortion::power(gamma);
    for (int k = 0; k < 200; ++k) {
      auto const   &space = batch()[static_cast<std::size_t>(k % kScenarios)].space;
      RandVar const eta   = random_nonnegative(rng, kAtoms);
      double const  ch    = choquet_integral(spec, space, eta);
      identity            = std::max(identity, std::abs(ch - spectral_rho(sig, space, eta)));
      oracle              = std::max(oracle, std::abs(ch - oracle_choquet(space, eta, gamma)));
    }
    for (int k = 0; k < 100; ++k) {
      auto const   &space = batch()[static_cast<std::size_t>(k)].space;
      RandVar const base  = random_nonnegative(rng, kAtoms);
      RandVar const f     = base.array().sqrt();
      RandVar const g     = base.array().square() + 2.0 * base.array();
      additivity          = std::max(additivity, std::abs(choquet_integral(spec, space, f + g) -
                                                   choquet_integral(spec, space, f) - choquet_integral(spec, space, g)));
    }
  }
  FilteredSpace const uniform({"a", "b", "c", "d"}, {0.25, 0.25, 0.25, 0.25}, {Partition::trivial(4)});
  RandVar             x(4);
  x << 3, 1, 1, 5;
  double const worked = std::abs(spectral_rho(Distortion::power(0.5), uniform, x) - (2.0 + std::sqrt(2.0)));
  bool const   ok     = identity <= 1e-9 && oracle <= 1e-9 && additivity <= 1e-9 && worked <= 1e-9;
  return {ok, fmt::format("choquet vs rho {:.2e}, vs layer-cake oracle {:.2e}, comonotone {:.2e}, worked value error {:.2e}",
                          identity, oracle, additivity, worked)};
}

auto criterion_snell_sandwich() -> Outcome
{
  double     snell = 0.0;
  int        violations = 0, count = 0;
  auto const l1 = SeminormSpec::lp(1);
  for (auto const &sc : batch()) {
    Rng rng(derive_seed(*sc.seed, "snell"));
    std::vector<Process> ys;
    for (auto const &[name, p] : sc.processes) { ys.push_back(p.values); }
    ys.push_back(random_adapted(rng, sc.space));
    for (auto const &y : ys) {
      double const pt = p_T(l1, sc.space, y).value;
      snell           = std::max(snell, std::abs(snell_sup(sc.space, y) - pt));
      if (!is_adapted(sc.space, y)) { continue; }
      double const pd = quotient_norm(sc.space, l1, y).value;
      if (pd < pt - 1e-8 || pd > 2.0 * pt + 1e-8) { ++violations; }
      ++count;
    }
  }
  return {snell <= 1e-10 && violations == 0,
          fmt::format("snell vs enumeration {:.2e}; {} adapted processes, {} sandwich violations", snell, count, violations)};
}

auto criterion_martingale_quotient() -> Outcome
{
  double     worst = 0.0;
  auto const l1    = SeminormSpec::lp(1);
  for (auto const &sc : batch()) {
    Rng           rng(derive_seed(*sc.seed, "martingale"));
    Process const m        = random_martingale(rng, sc.space);
    double        terminal = 0.0;
    for (int a = 0; a < kAtoms; ++a) { terminal += sc.space.prob(a) * std::abs(m(a, sc.space.horizon())); }
    worst = std::max(worst, std::abs(quotient_norm(sc.space, l1, m).value - terminal));
  }
  return {worst <= 1e-8, fmt::format("100 martingales, worst |p_D - E|y_T|| {:.2e}", worst)};
}

auto criterion_orthocomplement() -> Outcome
{
  int    rank_errors = 0;
  double ortho       = 0.0;
  for (auto const &sc : batch()) {
    auto const r        = orthocomplement(sc.space);
    int        expected_k = 0, expected_c = 0;
    for (int t = 0; t <= sc.space.horizon(); ++t) {
      expected_k += kAtoms - sc.space.partition(t).size();
      expected_c += sc.space.partition(t).size();
    }
    if (r.kernel_dim != expected_k || r.complement_dim != expected_c) { ++rank_errors; }
    ortho = std::max({ortho, r.orthogonality, r.measurability});
  }
  return {rank_errors == 0 && ortho <= 1e-12,
          fmt::format("{} rank mismatches, worst orthogonality/measurability {:.2e}", rank_errors, ortho)};
}

auto criterion_adjoint() -> Outcome
{
  double worst = 0.0;
  for (auto const &sc : batch()) {
    Rng rng(derive_seed(*sc.seed, "adjoint"));
    for (int k = 0; k < 10; ++k) {
      Process const     y = random_process(rng, kAtoms, sc.space.horizon());
      MeasurePair const m = random_pair(rng, sc.space);
      double const      lhs = oracle_pairing(sc.space, oracle_optional(sc.space, y), m);
      double const      rhs = oracle_pairing(sc.space, y, project_measures(sc.space, m));
      worst = std::max({worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)), adjoint_discrepancy(sc.space, y, m)});
    }
  }
  return {worst <= 1e-12, fmt::format("1000 pairs, worst discrepancy {:.2e}", worst)};
}

auto criterion_doob_constant() -> Outcome
{
  double l2 = 0.0, l1 = 0.0;
  for (auto const &sc : batch()) {
    l2 = std::max(l2, doob_constant(SeminormSpec::lp(2), SeminormSpec::lp(2), sc.space, 50, *sc.seed).estimate);
    l1 = std::max(l1, doob_constant(SeminormSpec::lp(1), SeminormSpec::lp(1), sc.space, 50, *sc.seed).estimate);
  }
  return {l2 <= 2.0 + 1e-9 && l1 > 1.5, fmt::format("largest L2 estimate {:.6f}, largest L1 estimate {:.6f}", l2, l1)};
}

auto criterion_quasimartingale() -> Outcome
{
  double      decomposition = 0.0;
  int         violations = 0, count = 0, min_depth = kHorizon, max_depth = 0;
  double      worst = kInf, oracle_worst = 0.0;
  std::string where;
  for (auto const &sc : batch()) {
    Rng       rng(derive_seed(*sc.seed, "quasimartingale"));
    int const depth = variation_depth(sc.space, sc.space.horizon(), 2e4);
    min_depth       = std::min(min_depth, depth);
    max_depth       = std::max(max_depth, depth);
    for (auto const &[kind, z] : {std::pair{"adapted", random_adapted(rng, sc.space)},
                                  std::pair{"supermartingale", sc.process("z").values}}) {
      auto const d = doob_decompose(sc.space, z);
      auto const e = decomposition_defects(sc.space, z, d);
      decomposition = std::max({decomposition, e.reconstruction, e.martingale, e.predictable, e.initial, e.uniqueness});
      for (auto const &[label, p] : {std::pair{"lp1", 1.0}, std::pair{"lp2", 2.0}}) {
        auto const   spec  = SeminormSpec::lp(p);
        auto const   v     = var_p(sc.space, spec, z, depth);
        double const var   = v.value;
        double const bound = polar(spec, sc.space, 2.0 * d.tv_A) +
                             polar(spec, sc.space, d.M.col(sc.space.horizon()).cwiseAbs());
        ++count;
        if (var > bound + 1e-8) { ++violations; }
        if (bound - var < worst) {
          worst        = bound - var;
          oracle_worst = bound - oracle_chain_value(sc.space, z, v.sequence, p);
          where        = fmt::format("{} {} seed {}", label, kind, *sc.seed);
        }
      }
    }
  }
  FilteredSpace const point({"w"}, {1.0}, {Partition::trivial(1), Partition::trivial(1), Partition::trivial(1)});
  Process             Z(1, 3);
  Z << 2, 1, 0;
  auto const   d0  = doob_decompose(point, Z);
  auto const   l1  = SeminormSpec::lp(1);
  double const v0  = var_p(point, l1, Z, 2).value;
  double const b0  = polar(l1, point, 2.0 * d0.tv_A + d0.M.col(2).cwiseAbs());
  bool const   ex  = std::abs(v0 - 2.0) <= 1e-12 && std::abs(b0 - 6.0) <= 1e-12;
  bool const   ok  = decomposition <= 1e-12 && violations == 0 && ex;
  return {ok, fmt::format("decomposition defects {:.2e}; chain depth {}..{}; {} of {} bound checks violated, worst "
                          "slack {:.4g} ({}, independent chain evaluation {:.4g}); example Var {:.4g}, bound {:.4g}",
                          decomposition, min_depth, max_depth, violations, count, worst, where, oracle_worst, v0, b0)};
}

auto criterion_polar_jensen() -> Outcome
{
  int lp_violations = 0, spectral_findings = 0, silent = 0;
  for (std::size_t k = 0; k < batch().size(); k += 5) {
    auto const &sc = batch()[k];
    for (double p : {1.0, 2.0, 3.0}) {
      auto const v = polar_jensen_check(sc.space, SeminormSpec::lp(p), 10, *sc.seed);
      if (v.status != Status::pass) { ++lp_violations; }
    }
    auto const v = polar_jensen_check(sc.space, SeminormSpec::spectral(0.5), 10, *sc.seed);
    if (v.margin < -1e-9) {
      if (v.status == Status::finding && !v.witness.is_null()) {
        ++spectral_findings;
      } else {
        ++silent;
      }
    }
  }
  return {lp_violations == 0 && silent == 0,
          fmt::format("20 scenarios: {} Lp violations, {} spectral findings with witness, {} unreported", lp_violations,
                      spectral_findings, silent)};
}

auto criterion_planted_defects() -> Outcome
{
  VerifyOptions opt;
  opt.checks  = {"doob", "martingale", "mhat", "variational"};
  opt.samples = 2;
  int missed = 0, total = 0;
  std::string first_miss;
  for (std::size_t k = 0; k < batch().size(); k += 5) {
    for (auto const &d : test::planted_defects(batch()[k])) {
      auto const  report = verify_text(d.text, opt);
      auto const *rec    = report.find(d.check);
      ++total;
      if (report.exit_code() != 1 || rec == nullptr || rec->status != Status::fail || !rec->witness.is_object() ||
          rec->witness.empty()) {
        ++missed;
        if (first_miss.empty()) { first_miss = fmt::format("{} on seed {}", d.name, *batch()[k].seed); }
      }
    }
  }
  return {missed == 0, fmt::format("{} planted defects over 5 generators, {} missed{}", total, missed,
                                   first_miss.empty() ? "" : " (first: " + first_miss + ")")};
}

auto criterion_determinism() -> Outcome
{
  int mismatches = 0;
  for (std::uint64_t seed : {3u, 42u}) {
    auto const a = random_scenario({kAtoms, kHorizon, seed, 2, false});
    auto const b = random_scenario({kAtoms, kHorizon, seed, 2, false});
    if (digest(a) != digest(b)) { ++mismatches; }
    VerifyOptions opt;
    opt.seed = seed;
    if (report_digest(verify(a, opt)) != report_digest(verify(b, opt))) { ++mismatches; }
  }
  return {mismatches == 0, fmt::format("2 scenarios generated and verified twice, {} digest mismatches", mismatches)};
}

} // namespace

auto main() -> int
{
  std::vector<std::pair<std::string, Outcome (*)()>> const criteria{
    {"left limit of optional projection equals predictable projection of left limit", criterion_left_limit},
    {"Hoelder bound for measure pairs", criterion_cs},
    {"Orlicz polar sandwich", criterion_orlicz},
    {"spectral Choquet identity and comonotone additivity", criterion_choquet},
    {"Snell envelope and quotient sandwich", criterion_snell_sandwich},
    {"martingale quotient identity", criterion_martingale_quotient},
    {"orthocomplement of the projection kernel", criterion_orthocomplement},
    {"adjoint identity of optional projection", criterion_adjoint},
    {"Doob constants", criterion_doob_constant},
    {"Doob decomposition and variation bound", criterion_quasimartingale},
    {"polar Jensen inequality", criterion_polar_jensen},
    {"planted defect detection", criterion_planted_defects},
    {"deterministic reports", criterion_determinism},
  };
  auto const start = std::chrono::steady_clock::now();
  batch();
  fmt::print("generated {} scenarios ({} atoms, horizon {}) in {:.1f}s\n", kScenarios, kAtoms, kHorizon,
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto const t0 = std::chrono::steady_clock::now();
    Outcome    o;
    try {
      o = criteria[i].second();
    } catch (std::exception const &e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 60.0) {
      o.pass = false;
      o.detail += "; exceeded 60s";
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} criterion {:>2}: {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail, secs);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
