#pragma once

#include "optdual/lp.hpp"
#include "optdual/measures.hpp"
#include "optdual/norms.hpp"
#include "optdual/verdict.hpp"

#include <optional>

namespace optdual {

struct QuotientResult
{
  double   value = 0.0;
  Process  z;
  LpResult lp;
};

/// p_D(y) = inf { p(||z||) : optional projection of z = y } for p = L^1 or L^inf,
/// solved as a linear program. Throws SolverError if the LP does not reach optimality.
auto quotient_norm(FilteredSpace const &space, SeminormSpec const &spec, Process const &y) -> QuotientResult;

/// True for the specs quotient_norm accepts.
auto has_quotient_program(SeminormSpec const &spec) -> bool;

/// p(||y||) p°(||u|| + ||utilde||) - <y, m>; nonnegative by the Hoelder bound.
auto cs_slack(FilteredSpace const &space, SeminormSpec const &spec, Process const &y, MeasurePair const &m) -> double;

struct PolarAttainment
{
  double  attained = 0.0;  // <y, m> / p(||y||) for the witness y
  double  polar_w  = 0.0;  // p°(||w||) with w_t = u_t + utilde_{t+1}
  double  polar_tv = 0.0;  // p°(||u|| + ||utilde||)
  Process y;
};

/// Sign-pattern witness y(omega, t) = xi(omega) sign(w_t(omega)) with xi the
/// polar witness of ||w||.
auto polar_attainment(FilteredSpace const &space, SeminormSpec const &spec, MeasurePair const &m) -> PolarAttainment;

/// |<oy, m> - <y, project_measures(m)>|.
auto adjoint_discrepancy(FilteredSpace const &space, Process const &y, MeasurePair const &m) -> double;

/// Upper bound <y, w> <= p_D(y) p°(||w||) on sampled adapted y, and attainment of
/// p°(||w||) by the projected sign-pattern witness, for an optional measure w.
auto quotient_polar_check(FilteredSpace const &space, SeminormSpec const &spec, Eigen::MatrixXd const &w,
                          int samples, std::uint64_t seed, double eps = 1e-3, double tol = 1e-9)
  -> std::vector<Verdict>;

/// p_T(y) <= p_D(y) <= 2 p_T(y) for L^1.
auto sandwich_check(FilteredSpace const &space, SeminormSpec const &spec, Process const &y, double tol = 1e-8)
  -> std::vector<Verdict>;

struct SeparatingTime
{
  /// Value per atom; -1 stands for infinity (never stops).
  std::vector<int> times;
  double           value = 0.0; // E(py_tau - y_{tau-}) on {tau < infinity}
  bool             enumerated = false;
};

/// A predictable time with E(py_tau - y_{tau-}) != 0 for a non-regular adapted y.
/// Scans the enumerated predictable times first, then the times tau_B = t on a
/// block B of F_{t-1} and infinity elsewhere.
auto find_separating_time(FilteredSpace const &space, Process const &y, double tol = 1e-12,
                          double bound = kDefaultEnumerationBound) -> std::optional<SeparatingTime>;

/// Checks on the regular (martingale) subspace for adapted y and optional w.
auto regular_dual_check(FilteredSpace const &space, SeminormSpec const &spec, Eigen::MatrixXd const &w,
                        Process const &y, double tol = 1e-9) -> std::vector<Verdict>;

} // namespace optdual
