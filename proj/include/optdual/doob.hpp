#pragma once

#include "optdual/norms.hpp"
#include "optdual/verdict.hpp"

namespace optdual {

/// Z = M - A with M a martingale and A predictable, A_0 = 0.
struct DoobDecomposition
{
  Process M;
  Process A;
  RandVar tv_A; // sum_t |A_t - A_{t-1}|
};

/// A_t = sum_{s=1..t} E[Z_{s-1} - Z_s | F_{s-1}], M = Z + A. Throws ValidationError for non-adapted Z.
auto doob_decompose(FilteredSpace const &space, Process const &Z) -> DoobDecomposition;

struct DecompositionDefects
{
  double reconstruction = 0.0; // max |M - A - Z|
  double martingale     = 0.0; // max |E[M_t | F_{t-1}] - M_{t-1}| and adaptedness of M
  double predictable    = 0.0; // max F_{t-1}-measurability defect of A_t
  double initial        = 0.0; // max |A_0|
  double uniqueness     = 0.0; // max difference after re-decomposing M - A
};

/// Audits a claimed decomposition of Z against every defining property.
auto decomposition_defects(FilteredSpace const &space, Process const &Z, DoobDecomposition const &d)
  -> DecompositionDefects;

struct Variation
{
  double                    value = 0.0;
  std::vector<StoppingTime> sequence;
  double                    evaluated = 0.0;
};

/// Number of chains tau_0 <= ... <= tau_k (k <= max_n) with distinct consecutive
/// members; sequences with repeats add nothing to the variation.
auto count_variation_chains(FilteredSpace const &space, int max_n, double bound = kDefaultEnumerationBound) -> double;

/// Largest max_n in [0, cap] whose chain count stays within `budget`.
auto variation_depth(FilteredSpace const &space, int cap, double budget, double bound = kDefaultEnumerationBound)
  -> int;

/// Var_p(Z) over nondecreasing stopping sequences of length at most max_n + 1.
auto var_p(FilteredSpace const &space, SeminormSpec const &spec, Process const &Z, int max_n,
           double bound = kDefaultEnumerationBound) -> Variation;

/// Var_p(Z) <= p°(2||A||_TV + |M_T|) <= p°(2||A||_TV) + p°(|M_T|), and the
/// simple-process functional bound l(y) <= p_D(y) Var_p(Z) on sampled y.
auto quasimartingale_bound_check(FilteredSpace const &space, SeminormSpec const &spec, Process const &Z, int max_n,
                                 int samples, std::uint64_t seed, double tol = 1e-8,
                                 double bound = kDefaultEnumerationBound) -> std::vector<Verdict>;

/// p°(E[eta | F_tau]) <= p°(eta) for sampled eta and every enumerated stopping time.
auto polar_jensen_check(FilteredSpace const &space, SeminormSpec const &spec, int samples, std::uint64_t seed,
                        double tol = 1e-9, double bound = kDefaultEnumerationBound) -> Verdict;

} // namespace optdual
