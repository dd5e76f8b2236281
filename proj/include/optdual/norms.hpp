#pragma once

#include "optdual/filtered_space.hpp"
#include "optdual/verdict.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace optdual {

/// Young function Phi on [0, inf) together with its conjugate
/// Phi*(y) = sup_{x >= 0} { xy - Phi(x) }.
///
///   power(p):     Phi(x) = x^p / p,     Phi*(y) = y^q / q with 1/p + 1/q = 1
///   exponential:  Phi(x) = e^x - 1,     Phi*(y) = y ln y - y + 1 for y >= 1, 0 on [0, 1]
class YoungFunction
{
public:
  enum class Kind
  {
    power,
    exponential
  };

  static auto power(double p) -> YoungFunction;
  static auto exponential() -> YoungFunction;

  auto kind() const -> Kind { return kind_; }
  /// Exponent p of the power family (unused for the exponential).
  auto exponent() const -> double { return p_; }

  auto operator()(double x) const -> double;
  auto conjugate(double y) const -> double;
  /// The maximizing x in the definition of Phi*(y), i.e. (Phi*)'(y).
  auto conjugate_slope(double y) const -> double;

  /// Largest violation of Fenchel's inequality xy <= Phi(x) + Phi*(y) over a
  /// sample grid, plus convexity/monotonicity defects of Phi. Nonpositive when valid.
  auto validation_defect() const -> double;

  friend auto operator==(YoungFunction const &, YoungFunction const &) -> bool = default;

private:
  YoungFunction(Kind k, double p)
    : kind_(k)
    , p_(p)
  {
  }

  Kind   kind_;
  double p_;
};

/// Nondecreasing spectral weight sigma on [0,1] with unit integral, accessed
/// through its tail integral tail(s) = int_{1-s}^1 sigma(u) du.
class Distortion
{
public:
  /// sigma(u) = (1 - gamma)(1 - u)^(-gamma), tail(s) = s^(1 - gamma).
  static auto power(double gamma) -> Distortion;
  /// Piecewise-linear sigma through `values` at equally spaced knots 0, 1/(K-1), ..., 1.
  static auto tabulated(std::vector<double> values) -> Distortion;

  auto gamma() const -> std::optional<double>;
  auto table() const -> std::vector<double> const & { return table_; }

  auto density(double u) const -> double;
  auto tail(double s) const -> double;
  /// Average of sigma over the u-interval (a, b].
  auto cell_average(double a, double b) const -> double;

  /// max over s in [lo, hi], s > 0, of (intercept + slope*s) / tail(s).
  auto max_ratio(double intercept, double slope, double lo, double hi) const -> double;

  friend auto operator==(Distortion const &, Distortion const &) -> bool = default;

private:
  Distortion() = default;

  double              gamma_ = 0.5; // negative for tabulated
  std::vector<double> table_;
  std::vector<double> right_mass_; // int_{u_j}^1 sigma for tabulated knots
};

struct LpNorm
{
  double p = 1.0; // may be +infinity

  friend auto operator==(LpNorm const &, LpNorm const &) -> bool = default;
};

struct OrliczNorm
{
  YoungFunction young;

  friend auto operator==(OrliczNorm const &, OrliczNorm const &) -> bool = default;
};

struct SpectralNorm
{
  Distortion sigma;

  friend auto operator==(SpectralNorm const &, SpectralNorm const &) -> bool = default;
};

/// A member of one of the built-in seminorm families on random variables.
class SeminormSpec
{
public:
  using Family = std::variant<LpNorm, OrliczNorm, SpectralNorm>;

  static auto lp(double p) -> SeminormSpec;
  static auto orlicz(YoungFunction young) -> SeminormSpec;
  static auto spectral(double gamma) -> SeminormSpec;
  static auto spectral(Distortion sigma) -> SeminormSpec;

  auto family() const -> Family const & { return family_; }
  auto is_lp() const -> bool { return std::holds_alternative<LpNorm>(family_); }
  auto is_lp(double p) const -> bool;
  auto is_orlicz() const -> bool { return std::holds_alternative<OrliczNorm>(family_); }
  auto is_spectral() const -> bool { return std::holds_alternative<SpectralNorm>(family_); }
  /// Short human-readable label, e.g. "lp(2)", "orlicz(exp)", "spectral(0.5)".
  auto label() const -> std::string;

  friend auto operator==(SeminormSpec const &, SeminormSpec const &) -> bool = default;

private:
  explicit SeminormSpec(Family f)
    : family_(std::move(f))
  {
  }

  Family family_;
};

/// One step of a left-continuous quantile function: q(u) = value for u in (previous upto, upto].
struct QuantileStep
{
  double upto;
  double value;
};

auto quantile(FilteredSpace const &space, RandVar const &eta) -> std::vector<QuantileStep>;

/// Luxemburg gauge inf{beta > 0 : E f(|xi|/beta) <= 1} of a nondecreasing f with f(0) = 0.
template <typename F>
auto luxemburg(FilteredSpace const &space, RandVar const &xi, F const &f) -> double;

auto seminorm(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &xi) -> double;
auto polar(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta) -> double;
/// A maximizer xi of E(xi eta) over {p(xi) <= 1}, built from the optimality
/// conditions of each family and rescaled so that p(xi) = 1 (zero for eta = 0).
auto polar_witness(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta) -> RandVar;
/// Luxemburg norm of the conjugate Young function, ||eta||_{Phi*}.
auto conjugate_luxemburg(YoungFunction const &young, FilteredSpace const &space, RandVar const &eta) -> double;

auto spectral_rho(Distortion const &sigma, FilteredSpace const &space, RandVar const &eta) -> double;
/// Layer-cake sum of polar(spec, 1{eta >= s}) over the distinct levels of eta >= 0.
auto choquet_integral(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta) -> double;

struct OracleResult
{
  double  value = 0.0;
  RandVar witness;
};

/// Direct maximization of E(xi eta) / p(xi) over xi = sign(eta) * g(|eta|)
/// with g nondecreasing, by multi-start Nelder-Mead. A lower bound on the polar.
auto polar_oracle(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta, int restarts = 8,
                  int iterations = 400, std::uint64_t seed = 1) -> OracleResult;

struct PropertyReport
{
  SeminormSpec         spec;
  std::vector<Verdict> items;

  auto worst() const -> Status;
};

/// Randomized audit of monotonicity, norm sandwich constants, order
/// continuity, truncation, and the Jensen inequalities for p and its polar
/// over all enumerated stopping times.
auto check_properties(SeminormSpec const &spec, FilteredSpace const &space, int samples, std::uint64_t seed,
                      double tol = 1e-9, double bound = kDefaultEnumerationBound) -> PropertyReport;

struct DoobEstimate
{
  double  estimate = 0.0;
  RandVar witness;
  int     evaluated = 0;
};

/// Lower estimate of the best constant q in p(sup_t |m_t|) <= q p'(m_T) over
/// sampled martingales m_t = E[xi | F_t].
auto doob_constant(SeminormSpec const &p, SeminormSpec const &p_prime, FilteredSpace const &space, int samples,
                   std::uint64_t seed) -> DoobEstimate;

// ---------------------------------------------------------------------------

template <typename F>
auto luxemburg(FilteredSpace const &space, RandVar const &xi, F const &f) -> double
{
  RandVar const a   = xi.cwiseAbs();
  double const  top = a.maxCoeff();
  if (top == 0.0) { return 0.0; }
  auto load = [&](double beta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) { s += space.prob(static_cast<int>(i)) * f(a[i] / beta); }
    return s;
  };
  double hi = top;
  while (load(hi) > 1.0) { hi *= 2.0; }
  double lo = hi;
  while (load(lo) <= 1.0 && lo > top * 1e-300) { lo *= 0.5; }
  // load(lo) > 1 >= load(hi); bisect to machine precision
  for (int it = 0; it < 200; ++it) {
    double const mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) { break; }
    (load(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

} // namespace optdual
