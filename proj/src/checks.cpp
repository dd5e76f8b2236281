#include "optdual/checks.hpp"

#include "optdual/doob.hpp"
#include "optdual/duality.hpp"
#include "optdual/errors.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace optdual {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

auto vec(RandVar const &v) -> json { return std::vector<double>(v.data(), v.data() + v.size()); }

// Keeps the worst observation of one identity or inequality over many instances.
class Tracker
{
public:
  static auto identity(std::string name) -> Tracker { return Tracker(std::move(name), MarginKind::discrepancy, Status::fail); }
  static auto inequality(std::string name, Status on_violation = Status::fail) -> Tracker
  {
    return Tracker(std::move(name), MarginKind::slack, on_violation);
  }

  void see(double v, json witness)
  {
    bool const worse = !seen_ || std::isnan(v) ||
                       (kind_ == MarginKind::discrepancy ? v > value_ : v < value_);
    if (worse && !std::isnan(value_)) {
      value_   = v;
      witness_ = std::move(witness);
    }
    seen_ = true;
    ++count_;
  }

  auto verdict(double tol) const -> Verdict
  {
    if (!seen_) {
      Verdict v;
      v.name   = name_;
      v.status = Status::skipped;
      v.kind   = kind_;
      v.note   = "no instances";
      return v;
    }
    json w = witness_;
    if (w.is_object()) { w["instances"] = count_; }
    auto v = kind_ == MarginKind::discrepancy ? identity_verdict(name_, value_, tol, w)
                                              : inequality_verdict(name_, value_, tol, w, on_violation_);
    return v;
  }

private:
  Tracker(std::string name, MarginKind kind, Status on_violation)
    : name_(std::move(name))
    , kind_(kind)
    , on_violation_(on_violation)
  {
  }

  std::string name_;
  MarginKind  kind_;
  Status      on_violation_;
  bool        seen_  = false;
  int         count_ = 0;
  double      value_ = 0.0;
  json        witness_;
};

template <typename T>
using Named = std::vector<std::pair<std::string, T>>;

struct Ctx
{
  Scenario const      &sc;
  FilteredSpace const &space;
  VerifyOptions const &opt;
  Rng                  rng;
  Named<SeminormSpec>  norms;

  auto tol(double fallback) const -> double { return opt.tol.value_or(fallback); }
  auto n() const -> int { return space.atom_count(); }
  auto T() const -> int { return space.horizon(); }

  auto raw_processes(int extra) -> Named<Process>
  {
    Named<Process> out;
    for (auto const &[name, p] : sc.processes) { out.emplace_back(name, p.values); }
    for (int k = 0; k < extra; ++k) { out.emplace_back(fmt::format("sample {}", k), random_process(rng, n(), T())); }
    return out;
  }

  auto adapted_processes(int extra) -> Named<Process>
  {
    Named<Process> out;
    for (auto const &[name, p] : sc.processes) {
      if (is_adapted(space, p.values)) { out.emplace_back(name, p.values); }
    }
    for (int k = 0; k < extra; ++k) { out.emplace_back(fmt::format("sample {}", k), random_adapted(rng, space)); }
    return out;
  }

  auto martingales(int extra) -> Named<Process>
  {
    Named<Process> out;
    for (auto const &[name, p] : sc.processes) {
      if (is_adapted(space, p.values) && is_martingale(space, p.values, 1e-10)) { out.emplace_back(name, p.values); }
    }
    for (int k = 0; k < extra; ++k) { out.emplace_back(fmt::format("sample {}", k), random_martingale(rng, space)); }
    return out;
  }

  auto random_pair() -> MeasurePair
  {
    MeasurePair m = MeasurePair::zero(space);
    m.u           = random_process(rng, n(), T());
    if (T() > 0) { m.utilde = random_process(rng, n(), T() - 1); }
    return m;
  }

  auto measures(int extra) -> Named<MeasurePair>
  {
    Named<MeasurePair> out;
    for (auto const &[name, m] : sc.measures) { out.emplace_back(name, m.pair); }
    for (int k = 0; k < extra; ++k) { out.emplace_back(fmt::format("sample {}", k), random_pair()); }
    return out;
  }

  // canonical single measures of the declared-optional pairs that lie in M-hat
  auto optional_ws(int extra) -> Named<Eigen::MatrixXd>
  {
    Named<Eigen::MatrixXd> out;
    for (auto const &[name, m] : sc.measures) {
      if (m.kind == MeasureClass::optional && is_in_M_hat(space, m.pair)) {
        out.emplace_back(name, canonicalize(space, m.pair).w);
      }
    }
    for (int k = 0; k < extra; ++k) {
      out.emplace_back(fmt::format("sample {}", k), optional_projection(space, random_process(rng, n(), T())));
    }
    return out;
  }

  auto randvars(int extra) -> Named<RandVar>
  {
    Named<RandVar> out;
    for (auto const &[name, v] : sc.variables) { out.emplace_back(name, v); }
    for (int k = 0; k < extra; ++k) { out.emplace_back(fmt::format("sample {}", k), random_randvar(rng, n())); }
    return out;
  }
};

using CheckFn = std::function<std::vector<Verdict>(Ctx &)>;

struct CheckDef
{
  std::string id;
  std::string summary;
  CheckFn     run;
};

auto check_tower(Ctx &c) -> std::vector<Verdict>
{
  auto tower = Tracker::identity("tower");
  auto mean  = Tracker::identity("expectation");
  for (auto const &[name, xi] : c.randvars(c.opt.samples)) {
    for (int t = 0; t <= c.T(); ++t) {
      RandVar const coarse = cond_exp(c.space, xi, t);
      mean.see(std::abs(c.space.expectation(coarse) - c.space.expectation(xi)), {{"instance", name}, {"t", t}});
      for (int s = t; s <= c.T(); ++s) {
        double const d = (cond_exp(c.space, cond_exp(c.space, xi, s), t) - coarse).cwiseAbs().maxCoeff();
        tower.see(d, {{"instance", name}, {"t", t}, {"s", s}});
      }
    }
  }
  return {tower.verdict(c.tol(1e-12)), mean.verdict(c.tol(1e-12))};
}

auto check_stopping_times(Ctx &c) -> std::vector<Verdict>
{
  auto const times = enumerate_stopping_times(c.space, c.opt.bound);
  auto       valid = Tracker::identity("stopping-property");
  auto       pred  = Tracker::identity("predictable-flag");
  for (auto const &tau : times) {
    auto const bad = stopping_time_violation(c.space, tau.times());
    valid.see(bad ? 1.0 : 0.0, {{"tau", tau.times()}, {"t", bad ? json(*bad) : json()}});
    pred.see(tau.predictable() == is_predictable_time(c.space, tau.times()) ? 0.0 : 1.0, {{"tau", tau.times()}});
  }
  double duplicates = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i - 1] < times[i])) { duplicates += 1.0; }
  }
  return {valid.verdict(0.0), pred.verdict(0.0),
          identity_verdict("count", std::abs(static_cast<double>(times.size()) - count_stopping_times(c.space)), 0.0,
                           {{"enumerated", times.size()}, {"counted", count_stopping_times(c.space)}}),
          identity_verdict("strictly-ordered", duplicates, 0.0)};
}

auto check_left_limit(Ctx &c) -> std::vector<Verdict>
{
  auto tr = Tracker::identity("left-limit-of-optional");
  for (auto const &[name, y] : c.raw_processes(c.opt.samples)) {
    Process const diff = left_limit(optional_projection(c.space, y)) - predictable_projection(c.space, left_limit(y));
    Eigen::Index  a = 0, t = 0;
    double const  d = diff.cwiseAbs().maxCoeff(&a, &t);
    tr.see(d, {{"instance", name}, {"atom", c.space.atoms()[static_cast<std::size_t>(a)]}, {"t", t}});
  }
  return {tr.verdict(c.tol(1e-12))};
}

auto check_projection_domination(Ctx &c) -> std::vector<Verdict>
{
  auto tr = Tracker::inequality("optional-below-conditional-sup");
  for (auto const &[name, y] : c.raw_processes(c.opt.samples)) {
    Process const oy  = optional_projection(c.space, y);
    RandVar const top = sup_norm(y);
    for (int t = 0; t <= c.T(); ++t) {
      RandVar const slack = cond_exp(c.space, top, t) - oy.col(t).cwiseAbs();
      Eigen::Index  a     = 0;
      double const  s     = slack.minCoeff(&a);
      tr.see(s, {{"instance", name}, {"t", t}, {"atom", c.space.atoms()[static_cast<std::size_t>(a)]}});
    }
  }
  return {tr.verdict(c.tol(1e-12))};
}

auto check_jensen_process(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           ys = c.raw_processes(std::max(1, c.opt.samples / 4));
  for (auto const &[label, spec] : c.norms) {
    auto tr = Tracker::inequality(label, spec.is_spectral() ? Status::finding : Status::fail);
    for (auto const &[name, y] : ys) {
      auto const   r   = p_T(spec, c.space, optional_projection(c.space, y), c.opt.bound);
      double const cap = seminorm(spec, c.space, sup_norm(y));
      tr.see(cap - r.value, {{"instance", name}, {"tau", r.witness.times()}, {"p_T", r.value}, {"p_sup", cap}});
    }
    out.push_back(tr.verdict(c.tol(1e-9)));
  }
  return out;
}

auto check_snell(Ctx &c) -> std::vector<Verdict>
{
  auto tr = Tracker::identity("snell-equals-p_T");
  auto l1 = SeminormSpec::lp(1);
  for (auto const &[name, y] : c.raw_processes(c.opt.samples)) {
    double const snell = snell_sup(c.space, y);
    auto const   enumd = p_T(l1, c.space, y, c.opt.bound);
    tr.see(std::abs(snell - enumd.value),
           {{"instance", name}, {"snell", snell}, {"enumerated", enumd.value}, {"tau", enumd.witness.times()}});
  }
  return {tr.verdict(c.tol(1e-10))};
}

auto check_bipolar(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           etas = c.randvars(c.opt.samples);
  for (auto const &[label, spec] : c.norms) {
    auto attain = Tracker::identity(label + "/attained");
    auto unit   = Tracker::identity(label + "/unit-witness");
    auto holder = Tracker::inequality(label + "/hoelder");
    for (auto const &[name, eta] : etas) {
      double const pol = polar(spec, c.space, eta);
      if (pol > 0.0) {
        RandVar const xi = polar_witness(spec, c.space, eta);
        attain.see(std::abs(c.space.expectation(xi.cwiseProduct(eta)) - pol) / (1.0 + pol), {{"instance", name}});
        unit.see(std::abs(seminorm(spec, c.space, xi) - 1.0), {{"instance", name}});
      }
      RandVar const other = random_randvar(c.rng, c.n());
      double const  lhs   = c.space.expectation(other.cwiseProduct(eta));
      double const  rhs   = seminorm(spec, c.space, other) * pol;
      holder.see((rhs - lhs) / (1.0 + std::abs(rhs)), {{"instance", name}, {"xi", vec(other)}});
    }
    out.push_back(attain.verdict(c.tol(1e-8)));
    out.push_back(unit.verdict(c.tol(1e-8)));
    out.push_back(holder.verdict(c.tol(1e-12)));
  }
  return out;
}

auto check_orlicz_sandwich(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           etas = c.randvars(c.opt.samples);
  for (auto const &[label, spec] : c.norms) {
    auto const *orl = std::get_if<OrliczNorm>(&spec.family());
    if (orl == nullptr) { continue; }
    auto lower = Tracker::inequality(label + "/lower");
    auto upper = Tracker::inequality(label + "/upper");
    for (auto const &[name, eta] : etas) {
      double const conj = conjugate_luxemburg(orl->young, c.space, eta);
      double const pol  = polar(spec, c.space, eta);
      lower.see(pol - conj, {{"instance", name}, {"conjugate_norm", conj}, {"polar", pol}});
      upper.see(2.0 * conj - pol, {{"instance", name}, {"conjugate_norm", conj}, {"polar", pol}});
    }
    out.push_back(lower.verdict(c.tol(1e-8)));
    out.push_back(upper.verdict(c.tol(1e-8)));
  }
  return out;
}

auto check_choquet(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           etas = c.randvars(c.opt.samples);
  for (auto const &[label, spec] : c.norms) {
    if (!spec.is_spectral() && !spec.is_lp(1)) { continue; }
    auto layer = Tracker::identity(label + "/layer-cake");
    auto como  = Tracker::identity(label + "/comonotone-additive");
    for (auto const &[name, eta] : etas) {
      RandVar const x   = eta.cwiseAbs();
      double const  pol = polar(spec, c.space, x);
      layer.see(std::abs(choquet_integral(spec, c.space, x) - pol), {{"instance", name}, {"polar", pol}});
      // nondecreasing transforms of the same variable are comonotone
      RandVar const f = x.array().sqrt();
      RandVar const g = x.array().square() + 1.0;
      double const  d = polar(spec, c.space, f + g) - polar(spec, c.space, f) - polar(spec, c.space, g);
      como.see(std::abs(d), {{"instance", name}});
    }
    out.push_back(layer.verdict(c.tol(1e-9)));
    out.push_back(como.verdict(c.tol(1e-9)));
  }
  return out;
}

auto check_polar_oracle(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           etas = c.randvars(std::min(c.opt.samples, 4));
  for (auto const &[label, spec] : c.norms) {
    auto below = Tracker::inequality(label + "/oracle-below-polar");
    auto gap   = Tracker::identity(label + "/oracle-gap");
    for (auto const &[name, eta] : etas) {
      double const pol = polar(spec, c.space, eta);
      auto const   orc = polar_oracle(spec, c.space, eta, 4, 300, derive_seed(c.opt.seed, name));
      json const   w   = {{"instance", name}, {"eta", vec(eta)}, {"polar", pol}, {"oracle", orc.value}};
      below.see(pol - orc.value, w);
      gap.see((pol - orc.value) / (1.0 + pol), w);
    }
    out.push_back(below.verdict(c.tol(1e-6)));
    auto g = gap.verdict(c.tol(1e-4));
    if (!spec.is_lp()) {
      g.status = Status::pass;
      g.kind   = MarginKind::estimate;
      g.note   = "search gap of the direct maximization; only Lp has a guaranteed Hoelder witness";
    }
    out.push_back(std::move(g));
  }
  return out;
}

auto check_properties_all(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[label, spec] : c.norms) {
    auto report = check_properties(spec, c.space, c.opt.samples, derive_seed(c.opt.seed, label), c.tol(1e-9), c.opt.bound);
    for (auto &item : report.items) {
      item.name = label + "/" + item.name;
      out.push_back(std::move(item));
    }
  }
  return out;
}

auto check_cs(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           ys = c.raw_processes(c.opt.samples);
  auto const           ms = c.measures(c.opt.samples);
  for (auto const &[label, spec] : c.norms) {
    auto tr = Tracker::inequality(label);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      for (auto const &[mname, m] : ms) {
        if (k >= c.sc.processes.size() && !mname.starts_with("sample")) { continue; }
        tr.see(cs_slack(c.space, spec, ys[k].second, m), {{"process", ys[k].first}, {"measure", mname}});
      }
    }
    out.push_back(tr.verdict(c.tol(1e-9)));
  }
  return out;
}

auto check_pptv(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           ms = c.measures(c.opt.samples);
  for (auto const &[label, spec] : c.norms) {
    auto below   = Tracker::inequality(label + "/below-total-variation");
    auto attain  = Tracker::identity(label + "/attains-polar-of-sum");
    auto aligned = Tracker::identity(label + "/sign-aligned-attains-total-variation");
    for (auto const &[name, m] : ms) {
      auto const att = polar_attainment(c.space, spec, m);
      below.see(att.polar_tv - att.attained, {{"instance", name}, {"attained", att.attained}, {"polar_tv", att.polar_tv}});
      attain.see(std::abs(att.attained - att.polar_w) / (1.0 + att.polar_w),
                 {{"instance", name}, {"attained", att.attained}, {"polar_w", att.polar_w}});
      MeasurePair same = m;
      for (int a = 0; a < c.n(); ++a) {
        for (int t = 0; t < c.T(); ++t) {
          same.utilde(a, t) = std::abs(same.utilde(a, t)) * (same.u(a, t) >= 0.0 ? 1.0 : -1.0);
        }
      }
      auto const sa = polar_attainment(c.space, spec, same);
      aligned.see(std::abs(sa.attained - sa.polar_tv) / (1.0 + sa.polar_tv),
                  {{"instance", name}, {"attained", sa.attained}, {"polar_tv", sa.polar_tv}});
    }
    out.push_back(below.verdict(c.tol(1e-9)));
    out.push_back(attain.verdict(c.tol(1e-8)));
    out.push_back(aligned.verdict(c.tol(1e-8)));
  }
  return out;
}

auto check_adjoint(Ctx &c) -> std::vector<Verdict>
{
  auto       tr = Tracker::identity("optional-projection-adjoint");
  auto const ys = c.raw_processes(c.opt.samples);
  auto const ms = c.measures(c.opt.samples);
  for (auto const &[yname, y] : ys) {
    for (auto const &[mname, m] : ms) {
      tr.see(adjoint_discrepancy(c.space, y, m), {{"process", yname}, {"measure", mname}});
    }
  }
  return {tr.verdict(c.tol(1e-12))};
}

auto check_mhat(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[name, m] : c.sc.measures) {
    if (m.kind == MeasureClass::optional) {
      auto const d = m_hat_defect(c.space, m.pair);
      json       w = d.witness;
      w["measure"] = name;
      out.push_back(identity_verdict(name, d.defect, c.tol(1e-12), w));
    }
    auto const proj = m_hat_defect(c.space, project_measures(c.space, m.pair));
    out.push_back(identity_verdict(name + "/projected", proj.defect, c.tol(1e-12), proj.witness));
  }
  auto tr = Tracker::identity("projected-samples");
  for (int k = 0; k < c.opt.samples; ++k) {
    tr.see(m_hat_defect(c.space, project_measures(c.space, c.random_pair())).defect, {{"sample", k}});
  }
  out.push_back(tr.verdict(c.tol(1e-12)));
  return out;
}

auto check_variational(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[name, m] : c.sc.measures) {
    if (m.kind != MeasureClass::optional) { continue; }
    auto const r = variational_check(c.space, m.pair, c.tol(1e-12));
    json       w = r.witness;
    w["measure"] = name;
    w["in_m_hat"] = r.in_m_hat;
    auto v        = identity_verdict(name, r.margin, c.tol(1e-12), w);
    if (r.holds && !r.in_m_hat) {
      v.status = Status::finding;
      v.note   = "identity holds but the pair is not in M-hat: u_t + utilde_{t+1} is optional";
    }
    out.push_back(std::move(v));
  }
  auto tr = Tracker::identity("projected-samples");
  for (int k = 0; k < c.opt.samples; ++k) {
    tr.see(variational_check(c.space, project_measures(c.space, c.random_pair())).margin, {{"sample", k}});
  }
  out.push_back(tr.verdict(c.tol(1e-12)));
  return out;
}

auto check_canonical(Ctx &c) -> std::vector<Verdict>
{
  auto pairing_tr = Tracker::identity("pairing-preserved");
  auto tv_tr      = Tracker::inequality("variation-not-increased");
  auto consider   = [&](std::string const &name, MeasurePair const &m) {
    auto const can = canonicalize(c.space, m);
    pairing_tr.see(can.pairing_discrepancy, {{"instance", name}});
    tv_tr.see(can.variation_slack, {{"instance", name}});
  };
  for (auto const &[name, m] : c.sc.measures) {
    if (is_in_M_hat(c.space, m.pair)) { consider(name, m.pair); }
  }
  for (int k = 0; k < c.opt.samples; ++k) {
    consider(fmt::format("sample {}", k), project_measures(c.space, c.random_pair()));
  }
  return {pairing_tr.verdict(c.tol(1e-12)), tv_tr.verdict(c.tol(1e-12))};
}

auto check_orthocomplement(Ctx &c) -> std::vector<Verdict>
{
  auto const r = orthocomplement(c.space);
  return {identity_verdict("kernel-dimension", std::abs(r.kernel_dim - r.expected_kernel_dim), 0.0,
                           {{"found", r.kernel_dim}, {"expected", r.expected_kernel_dim}}),
          identity_verdict("complement-dimension", std::abs(r.complement_dim - r.expected_complement_dim), 0.0,
                           {{"found", r.complement_dim}, {"expected", r.expected_complement_dim}}),
          identity_verdict("orthogonality", r.orthogonality, c.tol(1e-12)),
          identity_verdict("complement-optional", r.measurability, c.tol(1e-12))};
}

auto check_quotient_polar(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           ws = c.optional_ws(1);
  for (auto const &[label, spec] : c.norms) {
    for (auto const &[name, w] : ws) {
      auto vs = quotient_polar_check(c.space, spec, w, std::max(1, c.opt.samples / 2),
                                     derive_seed(c.opt.seed, label + name), 1e-3, c.tol(1e-9));
      for (auto &v : vs) {
        v.name = fmt::format("{}/{}/{}", label, name, v.name);
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

auto lp_norms(Ctx const &c) -> Named<SeminormSpec>
{
  Named<SeminormSpec> out;
  for (auto const &[label, spec] : c.norms) {
    if (has_quotient_program(spec)) { out.emplace_back(label, spec); }
  }
  if (out.empty()) { out.emplace_back("lp(1)", SeminormSpec::lp(1)); }
  return out;
}

auto check_quotient_seminorm(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           ys = c.adapted_processes(std::max(2, c.opt.samples / 2));
  for (auto const &[label, spec] : lp_norms(c)) {
    auto duality  = Tracker::identity(label + "/strong-duality");
    auto preimage = Tracker::identity(label + "/preimage");
    auto cap      = Tracker::inequality(label + "/below-pathwise-norm");
    auto homog    = Tracker::identity(label + "/homogeneous");
    auto triangle = Tracker::inequality(label + "/triangle");
    std::vector<double> values;
    for (auto const &[name, y] : ys) {
      auto const q = quotient_norm(c.space, spec, y);
      values.push_back(q.value);
      duality.see(std::abs(q.lp.value - q.lp.dual_value), {{"instance", name}, {"status", to_string(q.lp.status)}});
      preimage.see((optional_projection(c.space, q.z) - y).cwiseAbs().maxCoeff(), {{"instance", name}});
      cap.see(seminorm(spec, c.space, sup_norm(y)) - q.value, {{"instance", name}, {"p_D", q.value}});
      double const scale = -1.75;
      homog.see(std::abs(quotient_norm(c.space, spec, scale * y).value - std::abs(scale) * q.value), {{"instance", name}});
    }
    for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
      double const sum = quotient_norm(c.space, spec, ys[k].second + ys[k + 1].second).value;
      triangle.see(values[k] + values[k + 1] - sum, {{"first", ys[k].first}, {"second", ys[k + 1].first}});
    }
    for (auto *t : {&duality, &homog}) { out.push_back(t->verdict(c.tol(1e-9))); }
    out.push_back(preimage.verdict(c.tol(1e-10)));
    out.push_back(cap.verdict(c.tol(1e-9)));
    out.push_back(triangle.verdict(c.tol(1e-9)));
  }
  return out;
}

auto check_martingale_quotient(Ctx &c) -> std::vector<Verdict>
{
  auto       tr = Tracker::identity("p_D-equals-terminal-norm");
  auto const l1 = SeminormSpec::lp(1);
  for (auto const &[name, m] : c.martingales(c.opt.samples)) {
    double const terminal = c.space.expectation(m.col(c.T()).cwiseAbs());
    double const pd       = quotient_norm(c.space, l1, m).value;
    tr.see(std::abs(pd - terminal), {{"instance", name}, {"p_D", pd}, {"E|y_T|", terminal}});
  }
  return {tr.verdict(c.tol(1e-8))};
}

auto check_sandwich(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto const           ys = c.adapted_processes(std::max(2, c.opt.samples / 2));
  for (auto const &[label, spec] : c.norms) {
    std::map<std::string, Tracker> by_side;
    std::string                    note;
    for (auto const &[name, y] : ys) {
      for (auto const &v : sandwich_check(c.space, spec, y, c.tol(1e-8))) {
        auto it = by_side.try_emplace(v.name, Tracker::inequality(label + "/" + v.name)).first;
        json w  = v.witness.is_null() ? json::object() : v.witness;
        w["instance"] = name;
        it->second.see(v.margin, w);
        note = v.note;
      }
    }
    for (auto const &[_, t] : by_side) {
      auto v = t.verdict(c.tol(1e-8));
      v.note = note;
      out.push_back(std::move(v));
    }
  }
  return out;
}

auto check_regular(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  auto                 ys = c.adapted_processes(0);
  for (auto const &m : c.martingales(1)) {
    if (m.first.starts_with("sample")) { ys.emplace_back("martingale sample", m.second); }
  }
  auto const ws = c.optional_ws(ys.empty() ? 1 : 0);
  auto       w0 = ws.empty() ? Named<Eigen::MatrixXd>{{"sample", optional_projection(c.space, random_process(c.rng, c.n(), c.T()))}} : ws;
  for (auto const &[label, spec] : c.norms) {
    for (auto const &[yname, y] : ys) {
      for (auto const &[wname, w] : w0) {
        for (auto &v : regular_dual_check(c.space, spec, w, y, c.tol(1e-9))) {
          v.name = fmt::format("{}/{}/{}/{}", label, yname, wname, v.name);
          out.push_back(std::move(v));
        }
      }
    }
  }
  return out;
}

auto check_martingale(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[name, p] : c.sc.processes) {
    if (!p.martingale) { continue; }
    double worst = 0.0;
    int    at    = -1;
    for (int t = 1; t <= c.T(); ++t) {
      double const d = (cond_exp(c.space, p.values.col(t), t - 1) - p.values.col(t - 1)).cwiseAbs().maxCoeff();
      if (d > worst) {
        worst = d;
        at    = t;
      }
    }
    double const adapted = adaptedness_defect(c.space, p.values);
    json         w       = {{"process", name}, {"adaptedness", adapted}};
    if (at >= 0) {
      w["t"]             = at;
      w["E[y_t|F_t-1]"]  = vec(cond_exp(c.space, p.values.col(at), at - 1));
      w["y_t-1"]         = vec(p.values.col(at - 1));
    }
    out.push_back(identity_verdict(name, std::max(worst, adapted), c.tol(1e-12), w));
  }
  return out;
}

auto check_doob(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[name, p] : c.sc.processes) {
    if (!p.decomposition) { continue; }
    DoobDecomposition claimed{p.decomposition->M, p.decomposition->A, {}};
    auto const        e = decomposition_defects(c.space, p.values, claimed);
    json              w = {{"process", name},         {"reconstruction", e.reconstruction}, {"martingale", e.martingale},
                           {"predictable", e.predictable}, {"initial", e.initial},         {"uniqueness", e.uniqueness}};
    double const      worst = std::max({e.reconstruction, e.martingale, e.predictable, e.initial, e.uniqueness});
    if (is_adapted(c.space, p.values)) {
      auto const   d = doob_decompose(c.space, p.values);
      Eigen::Index a = 0, t = 0;
      double const gap = std::max((d.A - claimed.A).cwiseAbs().maxCoeff(&a, &t), (d.M - claimed.M).cwiseAbs().maxCoeff());
      w["distance_to_decomposition"] = gap;
      w["atom"]                      = c.space.atoms()[static_cast<std::size_t>(a)];
      w["t"]                         = t;
    }
    out.push_back(identity_verdict(name + "/claimed", worst, c.tol(1e-12), w));
  }
  auto rec = Tracker::identity("computed");
  for (auto const &[name, z] : c.adapted_processes(c.opt.samples)) {
    auto const d = doob_decompose(c.space, z);
    auto const e = decomposition_defects(c.space, z, d);
    rec.see(std::max({e.reconstruction, e.martingale, e.predictable, e.initial, e.uniqueness}),
            {{"instance", name}, {"reconstruction", e.reconstruction}, {"martingale", e.martingale},
             {"predictable", e.predictable}, {"uniqueness", e.uniqueness}});
  }
  out.push_back(rec.verdict(c.tol(1e-12)));
  return out;
}

auto check_quasimartingale(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  int const            depth = variation_depth(c.space, c.T(), c.opt.variation_budget, c.opt.bound);
  auto const           zs    = c.adapted_processes(1);
  for (auto const &[label, spec] : c.norms) {
    std::map<std::string, Tracker> by_name;
    for (auto const &[name, z] : zs) {
      auto const vs = quasimartingale_bound_check(c.space, spec, z, depth, std::max(1, c.opt.samples / 4),
                                                  derive_seed(c.opt.seed, label + name), c.tol(1e-8), c.opt.bound);
      for (auto const &v : vs) {
        auto const on_violation = v.status == Status::finding ? Status::finding : Status::fail;
        auto it = by_name.try_emplace(v.name, Tracker::inequality(label + "/" + v.name, on_violation)).first;
        json w  = v.witness.is_null() ? json::object() : v.witness;
        w["instance"] = name;
        w["max_n"]    = depth;
        it->second.see(v.margin, w);
      }
    }
    for (auto const &[_, t] : by_name) { out.push_back(t.verdict(c.tol(1e-8))); }
  }
  return out;
}

auto check_polar_jensen(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[label, spec] : c.norms) {
    auto v = polar_jensen_check(c.space, spec, c.opt.samples, derive_seed(c.opt.seed, label), c.tol(1e-9), c.opt.bound);
    v.name = label;
    out.push_back(std::move(v));
  }
  return out;
}

auto check_doob_constant(Ctx &c) -> std::vector<Verdict>
{
  std::vector<Verdict> out;
  for (auto const &[label, spec] : c.norms) {
    auto const est = doob_constant(spec, spec, c.space, c.opt.samples, derive_seed(c.opt.seed, label));
    json const w   = {{"xi", vec(est.witness)}, {"evaluated", est.evaluated}, {"estimate", est.estimate}};
    auto const *lp = std::get_if<LpNorm>(&spec.family());
    if (lp != nullptr && lp->p > 1.0) {
      double const q = std::isinf(lp->p) ? 1.0 : lp->p / (lp->p - 1.0);
      auto         v = inequality_verdict(label, q - est.estimate, c.tol(1e-9), w);
      v.note         = fmt::format("Doob constant {:.6g}", q);
      out.push_back(std::move(v));
    } else {
      Verdict v;
      v.name    = label;
      v.kind    = MarginKind::estimate;
      v.margin  = est.estimate;
      v.witness = w;
      v.note    = "estimate only";
      out.push_back(std::move(v));
    }
  }
  return out;
}

auto registry() -> std::vector<CheckDef> const &
{
  static std::vector<CheckDef> const defs = [] {
    std::vector<CheckDef> d{
      {"adjoint", "<oy, m> = <y, projected m> for processes and measure pairs", check_adjoint},
      {"bipolar", "polar witnesses attain the polar; Hoelder inequality for p and its polar", check_bipolar},
      {"canonical", "collapsing a pair in M-hat to a single optional measure keeps the pairing", check_canonical},
      {"choquet", "layer-cake and comonotone additivity of Choquet-type polars", check_choquet},
      {"cs", "<y, m> <= p(||y||) p°(||u|| + ||utilde||)", check_cs},
      {"doob", "claimed and computed Doob decompositions Z = M - A", check_doob},
      {"doob-constant", "estimated Doob constants, bounded by p/(p-1) for Lp with p > 1", check_doob_constant},
      {"jensen-process", "sup over stopping times of p(oy_tau) <= p(||y||)", check_jensen_process},
      {"left-limit", "left limit of the optional projection equals predictable projection of the left limit",
       check_left_limit},
      {"martingale", "processes declared martingales satisfy E[y_t | F_t-1] = y_t-1", check_martingale},
      {"martingale-quotient", "p_D of a martingale equals E|y_T| for L1", check_martingale_quotient},
      {"mhat", "measures declared optional lie in M-hat; projected pairs always do", check_mhat},
      {"orlicz-sandwich", "conjugate Luxemburg norm <= polar <= twice it", check_orlicz_sandwich},
      {"orthocomplement", "kernel of the optional projection and its orthocomplement", check_orthocomplement},
      {"polar-jensen", "p°(E[eta | F_tau]) <= p°(eta) over all stopping times", check_polar_jensen},
      {"polar-oracle", "direct maximization agrees with the closed-form polar", check_polar_oracle},
      {"pptv", "sign-pattern processes attain the polar of the pair", check_pptv},
      {"projection-domination", "|oy_t| <= E[sup |y| | F_t]", check_projection_domination},
      {"properties", "monotonicity, norm sandwich, order continuity, truncation and Jensen audits of every norm",
       check_properties_all},
      {"quasimartingale", "Var_p bounds through the Doob decomposition and the simple-process functional",
       check_quasimartingale},
      {"quotient-polar", "polar of the quotient seminorm on optional measures", check_quotient_polar},
      {"quotient-seminorm", "LP quotient seminorm: duality, preimage, seminorm axioms", check_quotient_seminorm},
      {"regular", "martingale preimages, Hoelder on the regular subspace, separating predictable times", check_regular},
      {"sandwich", "p_T(y) <= p_D(y) <= 2 p_T(y)", check_sandwich},
      {"snell", "Snell envelope value equals the enumerated optimal stopping value", check_snell},
      {"stopping-times", "enumerated stopping times are valid, predictable flags agree, counts match",
       check_stopping_times},
      {"tower", "tower property and mean preservation of conditional expectation", check_tower},
      {"variational", "variational characterization of M-hat", check_variational},
    };
    std::ranges::sort(d, {}, &CheckDef::id);
    return d;
  }();
  return defs;
}

auto rank(Status s) -> int
{
  switch (s) {
  case Status::fail: return 3;
  case Status::finding: return 2;
  case Status::pass: return 1;
  case Status::skipped: return 0;
  }
  return 0;
}

auto aggregate(CheckRecord &r) -> void
{
  if (r.items.empty()) {
    r.status = Status::skipped;
    r.note   = "not applicable to this scenario";
    return;
  }
  Verdict const *decide = &r.items.front();
  for (auto const &v : r.items) {
    if (rank(v.status) > rank(decide->status)) { decide = &v; }
  }
  r.status  = decide->status;
  r.kind    = decide->kind;
  r.margin  = decide->margin;
  r.witness = decide->witness;
  if (r.witness.is_object() || r.witness.is_null()) { r.witness["item"] = decide->name; }
  if (r.note.empty()) { r.note = decide->note; }
}

auto default_norms(Scenario const &s) -> Named<SeminormSpec>
{
  Named<SeminormSpec> out;
  for (auto const &[name, spec] : s.norms) { out.emplace_back(name, spec); }
  if (out.empty()) {
    out.emplace_back("l1", SeminormSpec::lp(1));
    out.emplace_back("l2", SeminormSpec::lp(2));
  }
  return out;
}

} // namespace

auto Report::status() const -> Status
{
  Status worst = Status::skipped;
  for (auto const &r : records) {
    if (rank(r.status) > rank(worst)) { worst = r.status; }
  }
  return worst;
}

auto Report::exit_code() const -> int { return status() == Status::fail ? 1 : 0; }

auto Report::find(std::string_view check) const -> CheckRecord const *
{
  for (auto const &r : records) {
    if (r.check == check) { return &r; }
  }
  return nullptr;
}

auto list_checks() -> std::vector<CheckInfo>
{
  std::vector<CheckInfo> out;
  for (auto const &d : registry()) { out.push_back({d.id, d.summary}); }
  return out;
}

auto verify(Scenario const &scenario, VerifyOptions const &opt) -> Report
{
  std::vector<CheckDef const *> selected;
  bool const all = opt.checks.empty() || (opt.checks.size() == 1 && opt.checks.front() == "all");
  for (auto const &d : registry()) {
    if (all || std::ranges::find(opt.checks, d.id) != opt.checks.end()) { selected.push_back(&d); }
  }
  if (!all) {
    for (auto const &id : opt.checks) {
      if (std::ranges::none_of(registry(), [&](auto const &d) { return d.id == id; })) {
        throw std::invalid_argument(fmt::format("unknown check '{}'; see --list-checks", id));
      }
    }
  }
  Report report;
  report.instance = digest(scenario);
  for (auto const *def : selected) {
    Ctx  ctx{scenario, scenario.space, opt, Rng(derive_seed(opt.seed, def->id)), default_norms(scenario)};
    auto start = std::chrono::steady_clock::now();
    CheckRecord rec;
    rec.check    = def->id;
    rec.instance = report.instance;
    try {
      rec.items = def->run(ctx);
      aggregate(rec);
    } catch (EnumerationLimit const &e) {
      rec.status = Status::skipped;
      rec.note   = e.what();
    } catch (std::exception const &e) {
      rec.status  = Status::fail;
      rec.note    = e.what();
      rec.witness = {{"error", e.what()}};
    }
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.records.push_back(std::move(rec));
  }
  return report;
}

auto verify_text(std::string const &text, VerifyOptions const &opt) -> Report
{
  std::optional<Scenario> scenario;
  try {
    scenario = parse_scenario(text);
  } catch (ValidationError const &e) {
    Report      report;
    report.instance = sha256_hex(text);
    CheckRecord rec;
    rec.check    = "scenario-valid";
    rec.instance = report.instance;
    rec.status   = Status::fail;
    rec.note     = e.what();
    rec.witness  = e.witness().is_null() ? json::object() : e.witness();
    rec.witness["error"] = e.what();
    report.records.push_back(std::move(rec));
    return report;
  }
  return verify(*scenario, opt);
}

auto to_json(CheckRecord const &r, bool with_runtime) -> json
{
  json j{{"check", r.check},
         {"instance", r.instance},
         {"status", to_string(r.status)},
         {"margin_kind", to_string(r.kind)},
         {"margin", r.margin}};
  if (!r.witness.is_null()) { j["witness"] = r.witness; }
  if (!r.note.empty()) { j["note"] = r.note; }
  json items = json::array();
  for (auto const &v : r.items) { items.push_back(to_json(v)); }
  j["items"] = std::move(items);
  if (with_runtime) { j["runtime_ms"] = r.runtime_ms; }
  return j;
}

auto to_json(Report const &r, bool with_runtime) -> json
{
  json records = json::array();
  std::map<std::string, int> counts;
  for (auto const &rec : r.records) {
    records.push_back(to_json(rec, with_runtime));
    ++counts[std::string(to_string(rec.status))];
  }
  return {{"instance", r.instance}, {"status", to_string(r.status())}, {"summary", counts}, {"records", records}};
}

auto to_markdown(Report const &r) -> std::string
{
  std::ostringstream out;
  out << "# Verification report\n\n";
  out << "Instance `" << r.instance << "`, overall **" << to_string(r.status()) << "**.\n\n";
  out << "| check | status | margin | kind | item | runtime (ms) |\n";
  out << "|---|---|---|---|---|---|\n";
  for (auto const &rec : r.records) {
    std::string item = rec.witness.is_object() && rec.witness.contains("item") ? rec.witness["item"].get<std::string>() : "";
    out << fmt::format("| {} | {} | {:.3g} | {} | {} | {:.1f} |\n", rec.check, to_string(rec.status), rec.margin,
                       to_string(rec.kind), item, rec.runtime_ms);
  }
  bool header = false;
  for (auto const &rec : r.records) {
    if (rec.status != Status::fail && rec.status != Status::finding) { continue; }
    if (!header) {
      out << "\n## Failures and findings\n";
      header = true;
    }
    out << "\n### " << rec.check << " (" << to_string(rec.status) << ")\n\n";
    if (!rec.note.empty()) { out << rec.note << "\n\n"; }
    out << "```json\n" << rec.witness.dump(2) << "\n```\n";
  }
  return out.str();
}

auto report_digest(Report const &r) -> std::string { return sha256_hex(to_json(r, false).dump()); }

} // namespace optdual
