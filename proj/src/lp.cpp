#include "optdual/lp.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace optdual {

namespace {

constexpr double kInf      = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol  = 1e-10;

struct Term
{
  int    column;
  double coef;
};

struct StandardForm
{
  Eigen::MatrixXd                A;
  Eigen::VectorXd                b;
  Eigen::VectorXd                c;
  Eigen::VectorXd                row_sign;
  Eigen::VectorXd                offset;
  std::vector<std::vector<Term>> map; // x_j = offset_j + sum coef * x'_column
  double                         constant = 0.0;
};

auto standardize(LinearProgram const &lp) -> StandardForm
{
  int const n  = lp.variables();
  int const m1 = static_cast<int>(lp.A_eq.rows());
  int const m2 = static_cast<int>(lp.A_le.rows());

  StandardForm sf;
  sf.offset = Eigen::VectorXd::Zero(n);
  sf.map.resize(static_cast<std::size_t>(n));
  int              cols = 0;
  std::vector<int> bounded; // (variable) with a finite range needing a row
  for (int j = 0; j < n; ++j) {
    double const lo = lp.lower[j], hi = lp.upper[j];
    if (lo > hi) { throw std::invalid_argument("variable bounds are inconsistent"); }
    if (std::isfinite(lo)) {
      sf.offset[j] = lo;
      sf.map[j].push_back({cols++, 1.0});
      if (std::isfinite(hi)) { bounded.push_back(j); }
    } else if (std::isfinite(hi)) {
      sf.offset[j] = hi;
      sf.map[j].push_back({cols++, -1.0});
    } else {
      sf.map[j].push_back({cols++, 1.0});
      sf.map[j].push_back({cols++, -1.0});
    }
  }
  int const structural = cols;
  int const m3         = static_cast<int>(bounded.size());
  int const m          = m1 + m2 + m3;
  int const total      = structural + m2 + m3; // plus slacks

  sf.A = Eigen::MatrixXd::Zero(m, total);
  sf.b = Eigen::VectorXd::Zero(m);
  sf.c = Eigen::VectorXd::Zero(total);
  for (int j = 0; j < n; ++j) {
    for (auto const &term : sf.map[j]) {
      sf.c[term.column] += lp.c[j] * term.coef;
      if (m1 > 0) { sf.A.col(term.column).head(m1) += term.coef * lp.A_eq.col(j); }
      if (m2 > 0) { sf.A.col(term.column).segment(m1, m2) += term.coef * lp.A_le.col(j); }
    }
  }
  sf.constant = lp.c.dot(sf.offset);
  if (m1 > 0) { sf.b.head(m1) = lp.b_eq - lp.A_eq * sf.offset; }
  if (m2 > 0) {
    sf.b.segment(m1, m2) = lp.b_le - lp.A_le * sf.offset;
    for (int i = 0; i < m2; ++i) { sf.A(m1 + i, structural + i) = 1.0; }
  }
  for (int k = 0; k < m3; ++k) {
    int const j   = bounded[k];
    int const row = m1 + m2 + k;
    sf.A(row, sf.map[j].front().column) = 1.0;
    sf.A(row, structural + m2 + k)      = 1.0;
    sf.b[row]                           = lp.upper[j] - lp.lower[j];
  }
  sf.row_sign = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) {
    if (sf.b[i] < 0.0) {
      sf.row_sign[i] = -1.0;
      sf.A.row(i) *= -1.0;
      sf.b[i] = -sf.b[i];
    }
  }
  return sf;
}

class Tableau
{
public:
  Tableau(Eigen::MatrixXd const &A, Eigen::VectorXd const &b)
    : m_(static_cast<int>(A.rows()))
    , n_(static_cast<int>(A.cols()))
    , t_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1))
    , basis_(static_cast<std::size_t>(m_))
  {
    t_.block(1, 0, m_, n_)  = A;
    t_.block(1, n_, m_, m_) = Eigen::MatrixXd::Identity(m_, m_);
    t_.col(n_ + m_).tail(m_) = b;
    for (int i = 0; i < m_; ++i) { basis_[i] = n_ + i; }
  }

  /// Installs reduced costs for the cost vector over all n+m columns.
  void set_costs(Eigen::VectorXd const &cost)
  {
    t_.row(0).head(n_ + m_) = cost.transpose();
    t_(0, n_ + m_)          = 0.0;
    for (int i = 0; i < m_; ++i) {
      double const cb = cost[basis_[i]];
      if (cb != 0.0) { t_.row(0) -= cb * t_.row(i + 1); }
    }
  }

  /// Runs Bland's rule over columns [0, allowed). Returns false if unbounded.
  auto optimize(int allowed, int &iterations, int max_iterations) -> std::optional<bool>
  {
    while (iterations < max_iterations) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (t_(0, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) { return true; }
      int    leave = -1;
      double best  = kInf;
      for (int i = 0; i < m_; ++i) {
        double const a = t_(i + 1, enter);
        if (a > kPivotTol) {
          double const ratio = t_(i + 1, n_ + m_) / a;
          double const slack = 1e-12 * (1.0 + std::abs(ratio));
          if (leave < 0 || ratio < best - slack || (ratio <= best + slack && basis_[i] < basis_[leave])) {
            best  = std::min(best, ratio);
            leave = i;
          }
        }
      }
      if (leave < 0) { return false; }
      pivot(leave, enter);
      ++iterations;
    }
    return std::nullopt;
  }

  void pivot(int row, int col)
  {
    t_.row(row + 1) /= t_(row + 1, col);
    for (int i = 0; i <= m_; ++i) {
      if (i != row + 1) {
        double const f = t_(i, col);
        if (f != 0.0) { t_.row(i) -= f * t_.row(row + 1); }
      }
    }
    basis_[row] = col;
  }

  auto objective() const -> double { return -t_(0, n_ + m_); }
  auto entry(int row, int col) const -> double { return t_(row + 1, col); }
  auto basis() const -> std::vector<int> const & { return basis_; }

private:
  int              m_, n_;
  Eigen::MatrixXd  t_;
  std::vector<int> basis_;
};

} // namespace

LinearProgram::LinearProgram(int n)
  : c(Eigen::VectorXd::Zero(n))
  , A_eq(0, n)
  , b_eq(0)
  , A_le(0, n)
  , b_le(0)
  , lower(Eigen::VectorXd::Zero(n))
  , upper(Eigen::VectorXd::Constant(n, kInf))
{
}

void LinearProgram::add_eq(Eigen::RowVectorXd const &row, double rhs)
{
  A_eq.conservativeResize(A_eq.rows() + 1, Eigen::NoChange);
  A_eq.bottomRows(1) = row;
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq[b_eq.size() - 1] = rhs;
}

void LinearProgram::add_le(Eigen::RowVectorXd const &row, double rhs)
{
  A_le.conservativeResize(A_le.rows() + 1, Eigen::NoChange);
  A_le.bottomRows(1) = row;
  b_le.conservativeResize(b_le.size() + 1);
  b_le[b_le.size() - 1] = rhs;
}

void LinearProgram::set_free(int j)
{
  lower[j] = -kInf;
  upper[j] = kInf;
}

auto to_string(LpStatus s) -> std::string_view
{
  switch (s) {
  case LpStatus::optimal: return "optimal";
  case LpStatus::infeasible: return "infeasible";
  case LpStatus::unbounded: return "unbounded";
  case LpStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

auto solve(LinearProgram const &lp, int max_iterations) -> LpResult
{
  int const n = lp.variables();
  if (lp.A_eq.cols() != n || lp.A_le.cols() != n || lp.b_eq.size() != lp.A_eq.rows() ||
      lp.b_le.size() != lp.A_le.rows() || lp.lower.size() != n || lp.upper.size() != n) {
    throw std::invalid_argument("linear program has inconsistent dimensions");
  }
  auto const sf = standardize(lp);
  int const  m  = static_cast<int>(sf.A.rows());
  int const  ns = static_cast<int>(sf.A.cols());

  LpResult result;
  Tableau  tab(sf.A, sf.b);

  // phase 1: minimize the sum of artificials
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ns + m);
  phase1.tail(m).setOnes();
  tab.set_costs(phase1);
  auto done = tab.optimize(ns + m, result.iterations, max_iterations);
  if (!done) { return result; }
  double const scale = 1.0 + (sf.b.size() > 0 ? sf.b.cwiseAbs().maxCoeff() : 0.0);
  if (tab.objective() > 1e-8 * scale) {
    result.status = LpStatus::infeasible;
    return result;
  }
  for (int i = 0; i < m; ++i) {
    if (tab.basis()[i] < ns) { continue; }
    for (int j = 0; j < ns; ++j) {
      if (std::abs(tab.entry(i, j)) > kPivotTol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // phase 2 over structural and slack columns only
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(ns + m);
  phase2.head(ns)        = sf.c;
  tab.set_costs(phase2);
  done = tab.optimize(ns, result.iterations, max_iterations);
  if (!done) { return result; }
  if (!*done) {
    result.status = LpStatus::unbounded;
    return result;
  }

  // refine the basic solution and the multipliers from the final basis
  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cB(m);
  for (int i = 0; i < m; ++i) {
    int const col = tab.basis()[i];
    B.col(i)      = col < ns ? Eigen::VectorXd(sf.A.col(col)) : Eigen::VectorXd(Eigen::VectorXd::Unit(m, col - ns));
    cB[i]         = col < ns ? sf.c[col] : 0.0;
  }
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(ns);
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::VectorXd const                xB = lu.solve(sf.b);
    pi                                      = lu.transpose().solve(cB);
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < ns) { xs[tab.basis()[i]] = std::max(0.0, xB[i]); }
    }
  }

  Eigen::VectorXd const reduced = sf.c - sf.A.transpose() * pi;
  result.dual_infeasibility     = ns > 0 ? std::max(0.0, -reduced.minCoeff()) : 0.0;
  result.complementarity        = xs.cwiseProduct(reduced).cwiseAbs().sum();

  result.x = sf.offset;
  for (int j = 0; j < n; ++j) {
    for (auto const &term : sf.map[j]) { result.x[j] += term.coef * xs[term.column]; }
  }
  Eigen::VectorXd const y = sf.row_sign.cwiseProduct(pi);
  int const             m1 = static_cast<int>(lp.A_eq.rows()), m2 = static_cast<int>(lp.A_le.rows());
  result.y_eq               = y.head(m1);
  result.y_le               = y.segment(m1, m2);
  result.value              = lp.c.dot(result.x);
  result.dual_value         = sf.b.dot(pi) + sf.constant;

  double residual = 0.0;
  if (m1 > 0) { residual = std::max(residual, (lp.A_eq * result.x - lp.b_eq).cwiseAbs().maxCoeff()); }
  if (m2 > 0) { residual = std::max(residual, (lp.A_le * result.x - lp.b_le).maxCoeff()); }
  for (int j = 0; j < n; ++j) {
    residual = std::max({residual, lp.lower[j] - result.x[j], result.x[j] - lp.upper[j]});
  }
  result.primal_residual = std::max(0.0, residual);
  result.status          = LpStatus::optimal;
  return result;
}

} // namespace optdual
