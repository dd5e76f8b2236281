#pragma once

#include "optdual/filtered_space.hpp"

#include "json.hpp"

namespace optdual {

/// Random measures on the grid. `u` has one column per time 0..T and acts on
/// y; `utilde` has one column per time 1..T (column k is time k+1) and acts
/// on the left limit y_{t-1}.
struct MeasurePair
{
  Eigen::MatrixXd u;
  Eigen::MatrixXd utilde;

  static auto zero(FilteredSpace const &space) -> MeasurePair;
  /// The pair (w, 0).
  static auto single(FilteredSpace const &space, Eigen::MatrixXd w) -> MeasurePair;
};

void check_shape(FilteredSpace const &space, MeasurePair const &m, std::string_view name = "measure");

/// Per-atom total variation sum_t |u_t| + sum_t |utilde_t|.
auto total_variation(MeasurePair const &m) -> RandVar;
auto total_variation(Eigen::MatrixXd const &w) -> RandVar;

/// E[ sum_t y_t u_t + sum_{t>=1} y_{t-1} utilde_t ].
auto pairing(FilteredSpace const &space, Process const &y, MeasurePair const &m) -> double;
/// E[ sum_t y_t w_t ], the pairing with (w, 0).
auto pairing(FilteredSpace const &space, Process const &y, Eigen::MatrixXd const &w) -> double;

/// (u^o, utilde^p) with u^o_t = E[u_t | F_t] and utilde^p_t = E[utilde_t | F_{t-1}].
auto project_measures(FilteredSpace const &space, MeasurePair const &m) -> MeasurePair;

struct Membership
{
  double         defect = 0.0;
  nlohmann::json witness; // {"part": "u"|"utilde", "t": time} of the worst slice
};

/// How far m is from M-hat: worst measurability defect of u_t in F_t and utilde_t in F_{t-1}.
auto m_hat_defect(FilteredSpace const &space, MeasurePair const &m) -> Membership;
auto is_in_M_hat(FilteredSpace const &space, MeasurePair const &m, double tol = 1e-12) -> bool;

struct Canonical
{
  Eigen::MatrixXd w;
  /// Largest |<y, m> - <y, (w, 0)>| over a basis of adapted processes.
  double pairing_discrepancy = 0.0;
  /// min over atoms of (||u|| + ||utilde||) - ||w||; nonnegative.
  double variation_slack = 0.0;
};

/// Single optional measure w_t = u_t + utilde_{t+1} representing m on adapted
/// processes. Throws ValidationError for m outside M-hat.
auto canonicalize(FilteredSpace const &space, MeasurePair const &m, double tol = 1e-12) -> Canonical;

struct VariationalResult
{
  bool           holds = true;
  double         margin = 0.0; // worst |<y,m> - <oy, u> - <p(y-), utilde>| over unit processes
  nlohmann::json witness;      // {"atom", "t"} of the worst unit process
  bool           in_m_hat = true;
};

/// Tests E[int y du + int y- dutilde] = E[int oy du + int p(y-) dutilde] on the
/// canonical basis of raw processes, and reports M-hat membership alongside.
auto variational_check(FilteredSpace const &space, MeasurePair const &m, double tol = 1e-12) -> VariationalResult;

struct Orthocomplement
{
  int    kernel_dim = 0;           // dim ker(optional projection) on raw processes
  int    expected_kernel_dim = 0;  // sum_t (|Omega| - b_t)
  int    complement_dim = 0;       // dim of the annihilator of the kernel
  int    expected_complement_dim = 0; // sum_t b_t
  double orthogonality = 0.0;      // max |<kernel vector, optional indicator measure>|
  double measurability = 0.0;      // worst F_t-measurability defect of the annihilator basis
};

/// The annihilator of ker(pi) under the pairing, computed by SVD, compared
/// against the optional measures.
auto orthocomplement(FilteredSpace const &space) -> Orthocomplement;

} // namespace optdual
