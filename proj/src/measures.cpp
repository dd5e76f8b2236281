#include "optdual/measures.hpp"

#include "optdual/errors.hpp"
#include "optdual/processes.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

namespace optdual {

auto MeasurePair::zero(FilteredSpace const &space) -> MeasurePair
{
  int const n = space.atom_count(), T = space.horizon();
  return {Eigen::MatrixXd::Zero(n, T + 1), Eigen::MatrixXd::Zero(n, T)};
}

auto MeasurePair::single(FilteredSpace const &space, Eigen::MatrixXd w) -> MeasurePair
{
  return {std::move(w), Eigen::MatrixXd::Zero(space.atom_count(), space.horizon())};
}

void check_shape(FilteredSpace const &space, MeasurePair const &m, std::string_view name)
{
  int const n = space.atom_count(), T = space.horizon();
  if (m.u.rows() != n || m.u.cols() != T + 1) {
    throw ValidationError(fmt::format("{}: u has shape {}x{}, expected {}x{}", name, m.u.rows(), m.u.cols(), n, T + 1),
                          {{"name", name}, {"part", "u"}});
  }
  if (m.utilde.rows() != n || m.utilde.cols() != T) {
    throw ValidationError(fmt::format("{}: utilde has shape {}x{}, expected {}x{}", name, m.utilde.rows(),
                                      m.utilde.cols(), n, T),
                          {{"name", name}, {"part", "utilde"}});
  }
}

auto total_variation(MeasurePair const &m) -> RandVar
{
  RandVar tv = m.u.cwiseAbs().rowwise().sum();
  if (m.utilde.cols() > 0) { tv += m.utilde.cwiseAbs().rowwise().sum(); }
  return tv;
}

auto total_variation(Eigen::MatrixXd const &w) -> RandVar { return w.cwiseAbs().rowwise().sum(); }

auto pairing(FilteredSpace const &space, Process const &y, MeasurePair const &m) -> double
{
  check_shape(space, y);
  check_shape(space, m);
  RandVar path = y.cwiseProduct(m.u).rowwise().sum();
  for (int t = 1; t <= space.horizon(); ++t) { path += y.col(t - 1).cwiseProduct(m.utilde.col(t - 1)); }
  return space.expectation(path);
}

auto pairing(FilteredSpace const &space, Process const &y, Eigen::MatrixXd const &w) -> double
{
  check_shape(space, y);
  check_shape(space, w, "measure");
  return space.expectation(y.cwiseProduct(w).rowwise().sum());
}

auto project_measures(FilteredSpace const &space, MeasurePair const &m) -> MeasurePair
{
  check_shape(space, m);
  MeasurePair out = m;
  for (int t = 0; t <= space.horizon(); ++t) { out.u.col(t) = cond_exp(space, m.u.col(t), t); }
  for (int t = 1; t <= space.horizon(); ++t) { out.utilde.col(t - 1) = cond_exp(space, m.utilde.col(t - 1), t - 1); }
  return out;
}

auto m_hat_defect(FilteredSpace const &space, MeasurePair const &m) -> Membership
{
  check_shape(space, m);
  Membership r;
  for (int t = 0; t <= space.horizon(); ++t) {
    double const d = measurability_defect(space, m.u.col(t), space.partition(t));
    if (d > r.defect) {
      r.defect  = d;
      r.witness = {{"part", "u"}, {"t", t}};
    }
  }
  for (int t = 1; t <= space.horizon(); ++t) {
    double const d = measurability_defect(space, m.utilde.col(t - 1), space.partition(t - 1));
    if (d > r.defect) {
      r.defect  = d;
      r.witness = {{"part", "utilde"}, {"t", t}};
    }
  }
  return r;
}

auto is_in_M_hat(FilteredSpace const &space, MeasurePair const &m, double tol) -> bool
{
  return m_hat_defect(space, m).defect <= tol;
}

auto canonicalize(FilteredSpace const &space, MeasurePair const &m, double tol) -> Canonical
{
  auto const membership = m_hat_defect(space, m);
  if (membership.defect > tol) {
    throw ValidationError(fmt::format("canonical form needs a pair in M-hat (defect {:.3g})", membership.defect),
                          membership.witness);
  }
  int const n = space.atom_count(), T = space.horizon();
  Canonical c;
  c.w = m.u;
  for (int t = 0; t < T; ++t) { c.w.col(t) += m.utilde.col(t); }

  // indicator processes of (block, time) span the adapted processes
  for (int t = 0; t <= T; ++t) {
    for (auto const &block : space.partition(t).blocks) {
      Process y = Process::Zero(n, T + 1);
      for (int a : block) { y(a, t) = 1.0; }
      c.pairing_discrepancy = std::max(c.pairing_discrepancy, std::abs(pairing(space, y, m) - pairing(space, y, c.w)));
    }
  }
  c.variation_slack = (total_variation(m) - total_variation(c.w)).minCoeff();
  return c;
}

auto variational_check(FilteredSpace const &space, MeasurePair const &m, double tol) -> VariationalResult
{
  check_shape(space, m);
  int const         n = space.atom_count(), T = space.horizon();
  VariationalResult r;
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < n; ++a) {
      Process y = Process::Zero(n, T + 1);
      y(a, t)   = 1.0;
      double const lhs = pairing(space, y, m);
      Process const oy  = optional_projection(space, y);
      Process const py  = predictable_projection(space, left_limit(y));
      double        rhs = space.expectation(oy.cwiseProduct(m.u).rowwise().sum());
      for (int s = 1; s <= T; ++s) { rhs += space.expectation(py.col(s).cwiseProduct(m.utilde.col(s - 1))); }
      double const gap = std::abs(lhs - rhs);
      if (gap > r.margin) {
        r.margin  = gap;
        r.witness = {{"atom", space.atoms()[a]}, {"t", t}};
      }
    }
  }
  r.holds    = r.margin <= tol;
  r.in_m_hat = m_hat_defect(space, m).defect <= tol;
  return r;
}

namespace {

auto null_space(Eigen::MatrixXd const &A, int cols) -> Eigen::MatrixXd
{
  if (A.rows() == 0) { return Eigen::MatrixXd::Identity(cols, cols); }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  double const top  = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  double const tol  = 1e-10 * std::max(1.0, top);
  int          rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > tol) { ++rank; }
  }
  return svd.matrixV().rightCols(cols - rank);
}

} // namespace

auto orthocomplement(FilteredSpace const &space) -> Orthocomplement
{
  int const n = space.atom_count(), T = space.horizon();
  int const N = n * (T + 1);
  // optional projection as a matrix on vec(z), index t*n + atom
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(N, N);
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < n; ++a) {
      RandVar const col = cond_exp(space, RandVar::Unit(n, a), t);
      pi.block(t * n, t * n + a, n, 1) = col;
    }
  }
  Eigen::VectorXd weight(N);
  for (int t = 0; t <= T; ++t) { weight.segment(t * n, n) = space.prob(); }

  Orthocomplement r;
  Eigen::MatrixXd const kernel = null_space(pi, N);
  r.kernel_dim                 = static_cast<int>(kernel.cols());
  for (int b : space.block_counts()) {
    r.expected_kernel_dim += n - b;
    r.expected_complement_dim += b;
  }
  Eigen::MatrixXd const annihilator = null_space(kernel.transpose() * weight.asDiagonal(), N);
  r.complement_dim                  = static_cast<int>(annihilator.cols());

  for (Eigen::Index k = 0; k < annihilator.cols(); ++k) {
    for (int t = 0; t <= T; ++t) {
      RandVar const slice = annihilator.col(k).segment(t * n, n);
      r.measurability     = std::max(r.measurability, measurability_defect(space, slice, space.partition(t)));
    }
  }
  for (int t = 0; t <= T; ++t) {
    for (auto const &block : space.partition(t).blocks) {
      Eigen::VectorXd ind = Eigen::VectorXd::Zero(N);
      for (int a : block) { ind[t * n + a] = 1.0; }
      Eigen::VectorXd const products = kernel.transpose() * weight.cwiseProduct(ind);
      if (products.size() > 0) { r.orthogonality = std::max(r.orthogonality, products.cwiseAbs().maxCoeff()); }
    }
  }
  return r;
}

} // namespace optdual
