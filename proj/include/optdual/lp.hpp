#pragma once

#include <Eigen/Core>

#include <string_view>

namespace optdual {

/// minimize c'x  subject to  A_eq x = b_eq,  A_le x <= b_le,  lower <= x <= upper.
/// Bounds may be infinite.
struct LinearProgram
{
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_le;
  Eigen::VectorXd b_le;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// n nonnegative variables, zero objective, no rows.
  explicit LinearProgram(int n);

  auto variables() const -> int { return static_cast<int>(c.size()); }
  void add_eq(Eigen::RowVectorXd const &row, double rhs);
  void add_le(Eigen::RowVectorXd const &row, double rhs);
  void set_free(int j);
};

enum class LpStatus
{
  optimal,
  infeasible,
  unbounded,
  iteration_limit
};

auto to_string(LpStatus s) -> std::string_view;

struct LpResult
{
  LpStatus        status = LpStatus::iteration_limit;
  double          value  = 0.0;
  Eigen::VectorXd x;
  /// Multipliers of the equality and inequality rows (inequality multipliers are <= 0).
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_le;
  double          dual_value = 0.0;
  /// Worst violation of any primal row or bound at x.
  double primal_residual = 0.0;
  /// Worst negative reduced cost in the standard form.
  double dual_infeasibility = 0.0;
  /// sum_j |x_j d_j| over standard-form variables and reduced costs.
  double complementarity = 0.0;
  int    iterations      = 0;
};

/// Dense two-phase tableau simplex with Bland's rule.
auto solve(LinearProgram const &lp, int max_iterations = 100000) -> LpResult;

} // namespace optdual
