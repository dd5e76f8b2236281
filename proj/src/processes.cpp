#include "optdual/processes.hpp"

#include "optdual/errors.hpp"

#include <fmt/format.h>

namespace optdual {

void check_shape(FilteredSpace const &space, Process const &y, std::string_view name)
{
  if (y.rows() != space.atom_count() || y.cols() != space.horizon() + 1) {
    throw ValidationError(fmt::format("{} has shape {}x{}, expected {} atoms x {} times", name, y.rows(), y.cols(),
                                      space.atom_count(), space.horizon() + 1),
                          {{"name", name}});
  }
}

auto sup_norm(Process const &y) -> RandVar { return y.cwiseAbs().rowwise().maxCoeff(); }

auto left_limit(Process const &y) -> Process
{
  Process out = y;
  for (Eigen::Index t = 1; t < y.cols(); ++t) { out.col(t) = y.col(t - 1); }
  return out;
}

auto adaptedness_defect(FilteredSpace const &space, Process const &y) -> double
{
  check_shape(space, y);
  double worst = 0.0;
  for (int t = 0; t <= space.horizon(); ++t) {
    worst = std::max(worst, measurability_defect(space, y.col(t), space.partition(t)));
  }
  return worst;
}

auto is_adapted(FilteredSpace const &space, Process const &y, double tol) -> bool
{
  return adaptedness_defect(space, y) <= tol;
}

auto optional_projection(FilteredSpace const &space, Process const &y) -> Process
{
  check_shape(space, y);
  Process out(y.rows(), y.cols());
  for (int t = 0; t <= space.horizon(); ++t) { out.col(t) = cond_exp(space, y.col(t), t); }
  return out;
}

auto predictable_projection(FilteredSpace const &space, Process const &y) -> Process
{
  check_shape(space, y);
  Process out(y.rows(), y.cols());
  for (int t = 0; t <= space.horizon(); ++t) { out.col(t) = cond_exp(space, y.col(t), std::max(0, t - 1)); }
  return out;
}

auto stopped(Process const &y, StoppingTime const &tau) -> RandVar
{
  RandVar out(y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) { out[i] = y(i, tau(static_cast<int>(i))); }
  return out;
}

auto martingale_defect(FilteredSpace const &space, Process const &y) -> double
{
  check_shape(space, y);
  double worst = 0.0;
  for (int t = 1; t <= space.horizon(); ++t) {
    worst = std::max(worst, (cond_exp(space, y.col(t), t - 1) - y.col(t - 1)).cwiseAbs().maxCoeff());
  }
  return worst;
}

auto is_martingale(FilteredSpace const &space, Process const &y, double tol) -> bool
{
  return adaptedness_defect(space, y) <= tol && martingale_defect(space, y) <= tol;
}

auto p_T(SeminormSpec const &spec, FilteredSpace const &space, Process const &y, double bound) -> StoppedSup
{
  check_shape(space, y);
  auto const times = enumerate_stopping_times(space, bound);
  std::size_t best = 0;
  double      value = -1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    double const v = seminorm(spec, space, stopped(y, times[k]));
    if (v > value) {
      value = v;
      best  = k;
    }
  }
  return {value, times[best]};
}

auto snell_sup(FilteredSpace const &space, Process const &y) -> double
{
  check_shape(space, y);
  int const T = space.horizon();
  RandVar   U = cond_exp(space, y.col(T).cwiseAbs(), T);
  for (int t = T - 1; t >= 0; --t) {
    U = cond_exp(space, y.col(t).cwiseAbs(), t).cwiseMax(cond_exp(space, U, t));
  }
  return space.expectation(U);
}

auto is_regular(FilteredSpace const &space, Process const &y, double tol) -> bool
{
  double const defect = adaptedness_defect(space, y);
  if (defect > tol) {
    throw ValidationError(fmt::format("regularity needs an adapted process (defect {:.3g})", defect));
  }
  return martingale_defect(space, y) <= tol;
}

} // namespace optdual
