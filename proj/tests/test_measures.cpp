#include "doctest.h"

#include "optdual/errors.hpp"
#include "optdual/measures.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"
#include "support.hpp"

using namespace optdual;
using namespace optdual::test;

namespace {

auto random_pair(Rng &rng, FilteredSpace const &s) -> MeasurePair
{
  MeasurePair m = MeasurePair::zero(s);
  m.u           = random_process(rng, s.atom_count(), s.horizon());
  if (s.horizon() > 0) { m.utilde = random_process(rng, s.atom_count(), s.horizon() - 1); }
  return m;
}

// pairing written out atom by atom and time by time
auto pairing_by_hand(FilteredSpace const &s, Process const &y, MeasurePair const &m) -> double
{
  double acc = 0.0;
  for (int a = 0; a < s.atom_count(); ++a) {
    for (int t = 0; t <= s.horizon(); ++t) {
      acc += s.prob(a) * y(a, t) * m.u(a, t);
      if (t >= 1) { acc += s.prob(a) * y(a, t - 1) * m.utilde(a, t - 1); }
    }
  }
  return acc;
}

} // namespace

TEST_CASE("pairing")
{
  auto const  s = s4();
  MeasurePair m = MeasurePair::zero(s);
  m.u(1, 2)     = 1.0;
  Process y     = Process::Zero(4, 3);
  y(1, 2)       = 8.0;
  CHECK(pairing(s, y, m) == doctest::Approx(2.0));
  CHECK(pairing(s, y, MeasurePair::zero(s)) == 0.0);

  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    MeasurePair const r = random_pair(rng, s);
    Process const     one = Process::Ones(4, 3);
    double const      mass = s.expectation(r.u.rowwise().sum() + r.utilde.rowwise().sum());
    CHECK(pairing(s, one, r) == doctest::Approx(mass));
    Process const yy = random_process(rng, 4, 2);
    CHECK(pairing(s, yy, r) == doctest::Approx(pairing_by_hand(s, yy, r)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(pairing(s, Process::Zero(4, 2), m), ValidationError);
}

TEST_CASE("measure projections and M-hat")
{
  auto const  s = s4();
  MeasurePair m = MeasurePair::zero(s);
  m.u(0, 1)     = 4.0;
  auto const proj = project_measures(s, m);
  CHECK((proj.u.col(1) - rv({2, 2, 0, 0})).norm() == doctest::Approx(0.0));
  CHECK(is_in_M_hat(s, proj));
  CHECK(!is_in_M_hat(s, m));
  CHECK(m_hat_defect(s, m).witness["t"] == 1);
  CHECK(is_in_M_hat(s, MeasurePair::zero(s)));
  CHECK(project_measures(s, proj).u == proj.u);

  Rng rng(32);
  for (int rep = 0; rep < 30; ++rep) {
    auto const        sp = rep % 2 ? s4() : dyadic(3);
    MeasurePair const r  = random_pair(rng, sp);
    Process const     y  = random_process(rng, sp.atom_count(), sp.horizon());
    auto const        pr = project_measures(sp, r);
    // defining identities: E sum oy u = E sum y u^o and E sum y_{t-1} ut^p = E sum p(y-) ut
    double lhs = 0.0, rhs = 0.0;
    Process const oy = optional_projection(sp, y);
    for (int t = 0; t <= sp.horizon(); ++t) {
      lhs += sp.expectation(oy.col(t).cwiseProduct(r.u.col(t)));
      rhs += sp.expectation(y.col(t).cwiseProduct(pr.u.col(t)));
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12);
    Process const pl = predictable_projection(sp, left_limit(y));
    lhs = rhs = 0.0;
    for (int t = 1; t <= sp.horizon(); ++t) {
      lhs += sp.expectation(pl.col(t).cwiseProduct(r.utilde.col(t - 1)));
      rhs += sp.expectation(y.col(t - 1).cwiseProduct(pr.utilde.col(t - 1)));
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("canonical single measure")
{
  auto const  s = s4();
  Rng         rng(33);
  MeasurePair plain = project_measures(s, MeasurePair::single(s, random_process(rng, 4, 2)));
  auto const  c0    = canonicalize(s, plain);
  CHECK(c0.w == plain.u);

  MeasurePair cancel = MeasurePair::zero(s);
  cancel.u.col(0)      = rv({1, 1, 1, 1});
  cancel.utilde.col(0) = rv({-1, -1, -1, -1});
  cancel.u.col(1)      = rv({2, 2, -3, -3});
  cancel.utilde.col(1) = rv({-2, -2, 3, 3});
  auto const c1        = canonicalize(s, cancel);
  CHECK(c1.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c1.variation_slack > 0.0);

  for (int rep = 0; rep < 20; ++rep) {
    MeasurePair const m = project_measures(s, random_pair(rng, s));
    auto const        c = canonicalize(s, m);
    CHECK(c.pairing_discrepancy <= 1e-12);
    CHECK(c.variation_slack >= -1e-12);
    for (int k = 0; k < 50; ++k) {
      Process const y = random_adapted(rng, s);
      CHECK(std::abs(pairing(s, y, m) - pairing(s, y, c.w)) <= 1e-12);
    }
  }
  MeasurePair raw = MeasurePair::zero(s);
  raw.u(0, 1)     = 1.0;
  CHECK_THROWS_AS(canonicalize(s, raw), ValidationError);
}

TEST_CASE("variational characterization")
{
  auto const s = s4();
  Rng        rng(34);
  auto const good = project_measures(s, random_pair(rng, s));
  auto const r    = variational_check(s, good);
  CHECK(r.holds);
  CHECK(r.in_m_hat);
  CHECK(r.margin <= 1e-12);
  CHECK(variational_check(s, MeasurePair::zero(s)).holds);

  MeasurePair bad = good;
  bad.u(0, 1) += 1.0;
  auto const rb = variational_check(s, bad);
  CHECK(!rb.holds);
  CHECK(!rb.in_m_hat);
  CHECK(rb.margin > 0.0);
  CHECK(rb.witness["t"] == 1);

  // raw slices whose sum w_t = u_t + ut_{t+1} is optional satisfy the identity
  MeasurePair hidden   = MeasurePair::zero(s);
  hidden.u(0, 1)       = 1.0;
  hidden.utilde(0, 1)  = -1.0;
  auto const rh        = variational_check(s, hidden);
  CHECK(rh.holds);
  CHECK(!rh.in_m_hat);
}

TEST_CASE("orthocomplement of the projection kernel")
{
  Rng rng(35);
  for (auto const &s : {s4(), two_atoms(), dyadic(3)}) {
    auto const r = orthocomplement(s);
    CHECK(r.kernel_dim == r.expected_kernel_dim);
    CHECK(r.complement_dim == r.expected_complement_dim);
    CHECK(r.orthogonality <= 1e-12);
    CHECK(r.measurability <= 1e-12);
  }
  auto const r = orthocomplement(s4());
  CHECK(r.expected_kernel_dim == 5);
  CHECK(r.expected_complement_dim == 7);
}
