#include "doctest.h"

#include "optdual/duality.hpp"
#include "optdual/errors.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"
#include "support.hpp"

#include <limits>

using namespace optdual;
using namespace optdual::test;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

auto random_optional(Rng &rng, FilteredSpace const &s) -> Eigen::MatrixXd
{
  return optional_projection(s, random_process(rng, s.atom_count(), s.horizon()));
}

auto all_verdicts_pass(std::vector<Verdict> const &vs) -> bool
{
  for (auto const &v : vs) {
    if (v.status != Status::pass) { return false; }
  }
  return true;
}

} // namespace

TEST_CASE("quotient norm worked cases")
{
  auto const s  = s4();
  auto const l1 = SeminormSpec::lp(1);
  Process    y  = process({{0, 0, 0, 0}, {3, 3, 0, 0}, {0, 8, 0, 0}});
  auto const q  = quotient_norm(s, l1, y);
  CHECK(q.value >= 2.0 - 1e-9);
  CHECK(q.value <= 4.0 + 1e-9);
  CHECK(q.value >= snell_sup(s, y) - 1e-9);
  CHECK((optional_projection(s, q.z) - y).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(seminorm(l1, s, sup_norm(q.z)) == doctest::Approx(q.value).epsilon(1e-10));

  // discrete filtration: the projection is the identity
  FilteredSpace const full({"a", "b", "c"}, {0.2, 0.3, 0.5},
                           {Partition::discrete(3), Partition::discrete(3)});
  Process const yy = process({{1, -2, 3}, {-4, 1, 0}});
  CHECK(quotient_norm(full, l1, yy).value == doctest::Approx(seminorm(l1, full, sup_norm(yy))));
  CHECK(quotient_norm(full, SeminormSpec::lp(kInf), yy).value == doctest::Approx(4.0));

  CHECK_THROWS_AS(quotient_norm(s, SeminormSpec::lp(2), y), std::invalid_argument);
  CHECK_THROWS_AS(quotient_norm(s, l1, process({{1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}})), ValidationError);
}

TEST_CASE("quotient norm of martingales and the Snell value")
{
  Rng        rng(51);
  auto const l1 = SeminormSpec::lp(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto const    s = rep % 2 ? s4() : dyadic(3);
    Process const m = random_martingale(rng, s);
    auto const    q = quotient_norm(s, l1, m);
    CHECK(std::abs(q.value - s.expectation(m.col(s.horizon()).cwiseAbs())) <= 1e-8);
    CHECK(std::abs(q.lp.value - q.lp.dual_value) <= 1e-9);
    Process const y = random_adapted(rng, s);
    double const  pd = quotient_norm(s, l1, y).value;
    // both equal min E s subject to E[s | F_t] >= |y_t| in discrete time
    CHECK(std::abs(pd - snell_sup(s, y)) <= 1e-9);
    CHECK(pd <= seminorm(l1, s, sup_norm(y)) + 1e-9);
    // seminorm properties on random pairs
    Process const y2 = random_adapted(rng, s);
    CHECK(quotient_norm(s, l1, y + y2).value <= pd + quotient_norm(s, l1, y2).value + 1e-9);
    CHECK(quotient_norm(s, l1, -2.5 * y).value == doctest::Approx(2.5 * pd).epsilon(1e-9));
  }
}

TEST_CASE("Hoelder bound and sign-pattern attainment")
{
  Rng                       rng(52);
  std::vector<SeminormSpec> specs{SeminormSpec::lp(1), SeminormSpec::lp(2), SeminormSpec::lp(kInf),
                                  SeminormSpec::orlicz(YoungFunction::power(2)),
                                  SeminormSpec::orlicz(YoungFunction::exponential()), SeminormSpec::spectral(0.5)};
  auto const s = s4();
  for (int rep = 0; rep < 20; ++rep) {
    MeasurePair m = MeasurePair::zero(s);
    m.u           = random_process(rng, 4, 2);
    m.utilde      = random_process(rng, 4, 1);
    Process const y = random_process(rng, 4, 2);
    for (auto const &spec : specs) {
      CAPTURE(spec.label());
      CHECK(cs_slack(s, spec, y, m) >= -1e-9);
      auto const att = polar_attainment(s, spec, m);
      CHECK(att.attained <= att.polar_tv + 1e-9);
      CHECK(att.attained == doctest::Approx(att.polar_w).epsilon(1e-8));
    }
    // sign-aligned pair: ||w|| = ||u|| + ||ut||, so the bound is reached
    MeasurePair aligned = m;
    for (int a = 0; a < 4; ++a) {
      for (int t = 0; t < 2; ++t) {
        aligned.utilde(a, t) = std::abs(aligned.utilde(a, t)) * (aligned.u(a, t) >= 0 ? 1.0 : -1.0);
      }
    }
    for (auto const &spec : {SeminormSpec::lp(1), SeminormSpec::lp(2), SeminormSpec::lp(3)}) {
      auto const att = polar_attainment(s, spec, aligned);
      CHECK(att.attained == doctest::Approx(att.polar_tv).epsilon(1e-4));
    }
  }
}

TEST_CASE("adjoint identity")
{
  Rng rng(53);
  for (int rep = 0; rep < 30; ++rep) {
    auto const  s = rep % 2 ? s4() : dyadic(3);
    MeasurePair m = MeasurePair::zero(s);
    m.u           = random_process(rng, s.atom_count(), s.horizon());
    m.utilde      = random_process(rng, s.atom_count(), s.horizon() - 1);
    CHECK(adjoint_discrepancy(s, random_process(rng, s.atom_count(), s.horizon()), m) <= 1e-12);
  }
}

TEST_CASE("quotient polar identities")
{
  auto const s  = s4();
  auto const l1 = SeminormSpec::lp(1);
  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(4, 3);
  unit(0, 1) = unit(1, 1) = 1.0;
  CHECK(all_verdicts_pass(quotient_polar_check(s, l1, unit, 10, 1)));
  auto const zero = quotient_polar_check(s, l1, Eigen::MatrixXd::Zero(4, 3), 5, 1);
  CHECK(all_verdicts_pass(zero));

  Rng rng(54);
  for (int rep = 0; rep < 10; ++rep) {
    auto const w = random_optional(rng, s);
    for (auto const &spec : {l1, SeminormSpec::lp(kInf), SeminormSpec::lp(2), SeminormSpec::spectral(0.5)}) {
      auto const vs = quotient_polar_check(s, spec, w, 10, rep);
      CAPTURE(spec.label());
      for (auto const &v : vs) {
        CAPTURE(v.name);
        CAPTURE(v.margin);
        CHECK(v.status == Status::pass);
      }
    }
  }
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(4, 3);
  raw(0, 1)           = 1.0;
  CHECK_THROWS_AS(quotient_polar_check(s, l1, raw, 1, 1), ValidationError);
}

TEST_CASE("sandwich between p_T and p_D")
{
  Rng        rng(55);
  auto const l1 = SeminormSpec::lp(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto const s = rep % 2 ? s4() : dyadic(3);
    CHECK(all_verdicts_pass(sandwich_check(s, l1, random_adapted(rng, s))));
    CHECK(all_verdicts_pass(sandwich_check(s, SeminormSpec::lp(2), random_adapted(rng, s))));
  }
  auto const s = s4();
  Process const c = Process::Constant(4, 3, -3.0);
  auto const    v = sandwich_check(s, l1, c);
  CHECK(v[0].margin == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("regular subspace")
{
  auto const s  = s4();
  auto const l1 = SeminormSpec::lp(1);
  Rng        rng(56);
  RandVar const xi = rv({4, 0, 2, 6});
  Process       m(4, 3);
  for (int t = 0; t <= 2; ++t) { m.col(t) = cond_exp(s, xi, t); }
  auto const w  = random_optional(rng, s);
  auto const vs = regular_dual_check(s, l1, w, m);
  REQUIRE(vs.size() == 2);
  CHECK(all_verdicts_pass(vs));

  Process const det = process({{1, 1, 1, 1}, {2, 2, 2, 2}, {2, 2, 2, 2}});
  auto const    sep = find_separating_time(s, det);
  REQUIRE(sep);
  CHECK(sep->enumerated);
  CHECK(sep->value == doctest::Approx(1.0));
  CHECK(all_verdicts_pass(regular_dual_check(s, l1, w, det)));

  // no finite predictable time separates this process; tau_B does
  FilteredSpace const two({"h", "t"}, {0.5, 0.5},
                          {Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)});
  Process const       y = process({{0, 0}, {1, -1}, {2, -2}});
  auto const          found = find_separating_time(two, y);
  REQUIRE(found);
  CHECK(!found->enumerated);
  CHECK(found->value == doctest::Approx(0.5));
  CHECK(found->times == std::vector<int>{2, -1});
}
