#pragma once

#include "optdual/filtered_space.hpp"
#include "optdual/norms.hpp"

namespace optdual {

/// Throws ValidationError unless `y` has one row per atom and T+1 columns.
void check_shape(FilteredSpace const &space, Process const &y, std::string_view name = "process");

/// Pathwise supremum norm: max_t |y(omega, t)|.
auto sup_norm(Process const &y) -> RandVar;
/// Left limits on the grid: column t holds y_{t-1}; column 0 holds y_0.
auto left_limit(Process const &y) -> Process;

/// Largest deviation of a column y_t from its F_t block averages.
auto adaptedness_defect(FilteredSpace const &space, Process const &y) -> double;
auto is_adapted(FilteredSpace const &space, Process const &y, double tol = 1e-12) -> bool;

/// Column t replaced by E[y_t | F_t].
auto optional_projection(FilteredSpace const &space, Process const &y) -> Process;
/// Column t replaced by E[y_t | F_{t-1}], with F_{-1} := F_0.
auto predictable_projection(FilteredSpace const &space, Process const &y) -> Process;

/// y_tau(omega) = y(omega, tau(omega)).
auto stopped(Process const &y, StoppingTime const &tau) -> RandVar;

/// max_t |E[y_t | F_{t-1}] - y_{t-1}|; zero exactly for martingales among adapted processes.
auto martingale_defect(FilteredSpace const &space, Process const &y) -> double;
auto is_martingale(FilteredSpace const &space, Process const &y, double tol = 1e-12) -> bool;

struct StoppedSup
{
  double       value;
  StoppingTime witness;
};

/// sup over all stopping times of p(y_tau), by exhaustive enumeration.
auto p_T(SeminormSpec const &spec, FilteredSpace const &space, Process const &y,
         double bound = kDefaultEnumerationBound) -> StoppedSup;

/// sup_tau E|y_tau| by backward induction on the Snell envelope of E[|y_t| | F_t].
auto snell_sup(FilteredSpace const &space, Process const &y) -> double;

/// True iff the predictable projection of the adapted process y equals its left limit
/// (on the grid: y is a martingale). Throws ValidationError for non-adapted y.
auto is_regular(FilteredSpace const &space, Process const &y, double tol = 1e-12) -> bool;

} // namespace optdual
