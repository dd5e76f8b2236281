#include "optdual/duality.hpp"

#include "optdual/errors.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"

#include <fmt/format.h>

#include <cmath>

namespace optdual {

namespace {

auto sign(double x) -> double { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_optional(FilteredSpace const &space, Eigen::MatrixXd const &w)
{
  check_shape(space, w, "measure");
  for (int t = 0; t <= space.horizon(); ++t) {
    double const d = measurability_defect(space, w.col(t), space.partition(t));
    if (d > 1e-12) {
      throw ValidationError(fmt::format("measure is not optional: slice t={} is not F_t-measurable", t), {{"t", t}});
    }
  }
}

void require_adapted(FilteredSpace const &space, Process const &y)
{
  for (int t = 0; t <= space.horizon(); ++t) {
    double const d = measurability_defect(space, y.col(t), space.partition(t));
    if (d > 1e-12) {
      throw ValidationError(fmt::format("process is not adapted: y_{} is not F_{}-measurable", t, t), {{"t", t}});
    }
  }
}

} // namespace

auto has_quotient_program(SeminormSpec const &spec) -> bool
{
  return spec.is_lp(1.0) || spec.is_lp(std::numeric_limits<double>::infinity());
}

auto quotient_norm(FilteredSpace const &space, SeminormSpec const &spec, Process const &y) -> QuotientResult
{
  if (!has_quotient_program(spec)) {
    throw std::invalid_argument(fmt::format("quotient_norm supports lp(1) and lp(inf), not {}", spec.label()));
  }
  check_shape(space, y);
  require_adapted(space, y);
  int const  n   = space.atom_count(), T = space.horizon();
  int const  nz  = n * (T + 1);
  bool const one = spec.is_lp(1.0);
  int const  ns  = one ? n : 1;

  LinearProgram lp(nz + ns);
  for (int k = 0; k < nz; ++k) { lp.set_free(k); }
  for (int a = 0; a < ns; ++a) { lp.c[nz + a] = one ? space.prob(a) : 1.0; }
  for (int t = 0; t <= T; ++t) {
    for (auto const &block : space.partition(t).blocks) {
      double mass = 0.0, target = 0.0;
      for (int a : block) {
        mass += space.prob(a);
        target += space.prob(a) * y(a, t);
      }
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nz + ns);
      for (int a : block) { row[t * n + a] = space.prob(a) / mass; }
      lp.add_eq(row, target / mass);
    }
  }
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < n; ++a) {
      Eigen::RowVectorXd row       = Eigen::RowVectorXd::Zero(nz + ns);
      row[t * n + a]               = 1.0;
      row[nz + (one ? a : 0)]      = -1.0;
      lp.add_le(row, 0.0);
      row[t * n + a] = -1.0;
      lp.add_le(row, 0.0);
    }
  }
  QuotientResult r;
  r.lp = solve(lp);
  if (r.lp.status != LpStatus::optimal) {
    throw SolverError(fmt::format("quotient program ended with status {}", to_string(r.lp.status)));
  }
  r.value = r.lp.value;
  r.z     = Process(n, T + 1);
  for (int t = 0; t <= T; ++t) { r.z.col(t) = r.lp.x.segment(t * n, n); }
  return r;
}

auto cs_slack(FilteredSpace const &space, SeminormSpec const &spec, Process const &y, MeasurePair const &m) -> double
{
  return seminorm(spec, space, sup_norm(y)) * polar(spec, space, total_variation(m)) - pairing(space, y, m);
}

auto polar_attainment(FilteredSpace const &space, SeminormSpec const &spec, MeasurePair const &m) -> PolarAttainment
{
  check_shape(space, m);
  int const       n = space.atom_count(), T = space.horizon();
  Eigen::MatrixXd w = m.u;
  for (int t = 0; t < T; ++t) { w.col(t) += m.utilde.col(t); }
  RandVar const   tv_w = total_variation(w);
  RandVar const   xi   = polar_witness(spec, space, tv_w);
  PolarAttainment r;
  r.y = Process(n, T + 1);
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < n; ++a) { r.y(a, t) = xi[a] * sign(w(a, t)); }
  }
  r.polar_w     = polar(spec, space, tv_w);
  r.polar_tv    = polar(spec, space, total_variation(m));
  double const p = seminorm(spec, space, sup_norm(r.y));
  r.attained    = p > 0.0 ? pairing(space, r.y, m) / p : 0.0;
  return r;
}

auto adjoint_discrepancy(FilteredSpace const &space, Process const &y, MeasurePair const &m) -> double
{
  return std::abs(pairing(space, optional_projection(space, y), m) - pairing(space, y, project_measures(space, m)));
}

auto quotient_polar_check(FilteredSpace const &space, SeminormSpec const &spec, Eigen::MatrixXd const &w,
                          int samples, std::uint64_t seed, double eps, double tol) -> std::vector<Verdict>
{
  require_optional(space, w);
  int const    n       = space.atom_count(), T = space.horizon();
  bool const   program = has_quotient_program(spec);
  RandVar const tv     = total_variation(w);
  double const pw      = polar(spec, space, tv);
  auto         p_D     = [&](Process const &y) {
    return program ? quotient_norm(space, spec, y).value : seminorm(spec, space, sup_norm(y));
  };
  std::vector<Verdict> out;

  Rng            rng(seed);
  double         worst = std::numeric_limits<double>::infinity();
  nlohmann::json witness;
  for (int s = 0; s < samples; ++s) {
    Process const y     = random_adapted(rng, space);
    double const  slack = p_D(y) * pw - pairing(space, y, w);
    if (slack < worst) {
      worst   = slack;
      witness = {{"sample", s}};
    }
  }
  if (samples > 0) {
    auto v = inequality_verdict("quotient-polar-upper", worst, tol, witness);
    if (!program) { v.note = "p_D bounded above by p(||y||)"; }
    out.push_back(v);
  }

  RandVar const xi = polar_witness(spec, space, tv);
  Process       z(n, T + 1);
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < n; ++a) { z(a, t) = xi[a] * sign(w(a, t)); }
  }
  Process const y     = optional_projection(space, z);
  double const  denom = program ? quotient_norm(space, spec, y).value : seminorm(spec, space, sup_norm(z));
  double const  ratio = denom > 0.0 ? pairing(space, y, w) / denom : 0.0;
  auto          att   = inequality_verdict("quotient-polar-attained", ratio - (1.0 - eps) * pw, tol,
                                           {{"attained", ratio}, {"polar", pw}});
  out.push_back(att);
  if (spec.is_lp(1.0)) {
    double const esssup = tv.size() > 0 ? tv.maxCoeff() : 0.0;
    auto         v      = inequality_verdict("quotient-polar-esssup", eps * esssup - std::abs(esssup - ratio), tol,
                                             {{"esssup", esssup}, {"attained", ratio}});
    out.push_back(v);
  }
  return out;
}

auto sandwich_check(FilteredSpace const &space, SeminormSpec const &spec, Process const &y, double tol)
  -> std::vector<Verdict>
{
  check_shape(space, y);
  require_adapted(space, y);
  double const         pt = p_T(spec, space, y).value;
  std::vector<Verdict> out;
  if (has_quotient_program(spec)) {
    double const pd = quotient_norm(space, spec, y).value;
    out.push_back(inequality_verdict("sandwich-lower", pd - pt, tol, {{"p_T", pt}, {"p_D", pd}}));
    out.push_back(inequality_verdict("sandwich-upper", 2.0 * pt - pd, tol, {{"p_T", pt}, {"p_D", pd}}));
  } else {
    double const upper = seminorm(spec, space, sup_norm(y));
    auto v = inequality_verdict("sandwich-lower", upper - pt, tol, {{"p_T", pt}, {"p(||y||)", upper}});
    v.note = "one-sided: p_D bounded above by p(||y||)";
    out.push_back(v);
  }
  return out;
}

namespace {

// E(py_tau - y_{tau-}) for a time given per atom, -1 meaning never
auto separation_value(FilteredSpace const &space, Process const &y, std::vector<int> const &times) -> double
{
  double value = 0.0;
  for (int t = 1; t <= space.horizon(); ++t) {
    RandVar const jump = cond_exp(space, y.col(t), t - 1) - y.col(t - 1);
    for (int a = 0; a < space.atom_count(); ++a) {
      if (times[a] == t) { value += space.prob(a) * jump[a]; }
    }
  }
  return value;
}

} // namespace

auto find_separating_time(FilteredSpace const &space, Process const &y, double tol, double bound)
  -> std::optional<SeparatingTime>
{
  check_shape(space, y);
  require_adapted(space, y);
  if (count_stopping_times(space) <= bound) {
    for (auto const &tau : enumerate_stopping_times(space, bound)) {
      if (!tau.predictable()) { continue; }
      double const v = separation_value(space, y, tau.times());
      if (std::abs(v) > tol) { return SeparatingTime{tau.times(), v, true}; }
    }
  }
  for (int t = 1; t <= space.horizon(); ++t) {
    for (auto const &block : space.partition(t - 1).blocks) {
      std::vector<int> times(static_cast<std::size_t>(space.atom_count()), -1);
      for (int a : block) { times[a] = t; }
      double const v = separation_value(space, y, times);
      if (std::abs(v) > tol) { return SeparatingTime{times, v, false}; }
    }
  }
  return std::nullopt;
}

auto regular_dual_check(FilteredSpace const &space, SeminormSpec const &spec, Eigen::MatrixXd const &w,
                        Process const &y, double tol) -> std::vector<Verdict>
{
  require_optional(space, w);
  check_shape(space, y);
  require_adapted(space, y);
  int const            T = space.horizon();
  std::vector<Verdict> out;
  if (martingale_defect(space, y) <= 1e-12) {
    Process z(y.rows(), y.cols());
    for (int t = 0; t <= T; ++t) { z.col(t) = y.col(T); }
    double const gap = (optional_projection(space, z) - y).cwiseAbs().maxCoeff();
    out.push_back(identity_verdict("regular-preimage", gap, 1e-12));
    double const bound = seminorm(spec, space, y.col(T)) * polar(spec, space, total_variation(w));
    out.push_back(inequality_verdict("regular-holder", bound - pairing(space, y, w), tol));
  } else {
    auto    sep = find_separating_time(space, y);
    Verdict v;
    v.name   = "regular-separation";
    v.kind   = MarginKind::estimate;
    v.status = sep ? Status::pass : Status::fail;
    if (sep) {
      v.margin                  = sep->value;
      nlohmann::json times      = nlohmann::json::array();
      for (int x : sep->times) { times.push_back(x < 0 ? nlohmann::json("inf") : nlohmann::json(x)); }
      v.witness                 = {{"tau", times}, {"value", sep->value}};
      v.note                    = sep->enumerated ? "enumerated predictable time" : "tau_B construction";
    } else {
      v.note = "no separating predictable time found for a non-martingale";
    }
    out.push_back(v);
  }
  return out;
}

} // namespace optdual
