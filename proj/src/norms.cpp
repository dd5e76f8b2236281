#include "optdual/norms.hpp"

#include "optdual/errors.hpp"
#include "optdual/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace optdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

auto sign(double x) -> double { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};

} // namespace

// ---------------------------------------------------------------- Young

auto YoungFunction::power(double p) -> YoungFunction
{
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ValidationError(fmt::format("power Young function needs a finite exponent p > 1, got {}", p));
  }
  return YoungFunction(Kind::power, p);
}

auto YoungFunction::exponential() -> YoungFunction { return YoungFunction(Kind::exponential, 0.0); }

auto YoungFunction::operator()(double x) const -> double
{
  x = std::abs(x);
  if (kind_ == Kind::power) { return std::pow(x, p_) / p_; }
  return std::expm1(x);
}

auto YoungFunction::conjugate(double y) const -> double
{
  y = std::abs(y);
  if (kind_ == Kind::power) {
    double const q = p_ / (p_ - 1.0);
    return std::pow(y, q) / q;
  }
  return y >= 1.0 ? y * std::log(y) - y + 1.0 : 0.0;
}

auto YoungFunction::conjugate_slope(double y) const -> double
{
  y = std::abs(y);
  if (kind_ == Kind::power) {
    double const q = p_ / (p_ - 1.0);
    return std::pow(y, q - 1.0);
  }
  return y > 1.0 ? std::log(y) : 0.0;
}

auto YoungFunction::validation_defect() const -> double
{
  double worst = std::abs((*this)(0.0));
  constexpr int n = 60;
  for (int i = 0; i <= n; ++i) {
    double const x = 4.0 * i / n;
    if (i > 0) {
      double const prev = 4.0 * (i - 1) / n;
      worst = std::max(worst, (*this)(prev) - (*this)(x)); // nondecreasing
    }
    if (i > 0 && i < n) {
      double const a = 4.0 * (i - 1) / n, b = 4.0 * (i + 1) / n;
      worst = std::max(worst, (*this)(x) - 0.5 * ((*this)(a) + (*this)(b))); // midpoint convexity
    }
    for (int j = 0; j <= n; ++j) {
      double const y     = 6.0 * j / n;
      double const slack = (*this)(x) + conjugate(y) - x * y;
      worst = std::max(worst, -slack - 1e-9 * (1.0 + x * y));
    }
  }
  return worst;
}

// ---------------------------------------------------------------- Distortion

auto Distortion::power(double gamma) -> Distortion
{
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError(fmt::format("spectral distortion exponent must lie in (0,1), got {}", gamma));
  }
  Distortion d;
  d.gamma_ = gamma;
  return d;
}

auto Distortion::tabulated(std::vector<double> values) -> Distortion
{
  if (values.size() < 2) { throw ValidationError("tabulated spectral density needs at least two knots"); }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] >= 0.0) || !std::isfinite(values[j])) {
      throw ValidationError(fmt::format("tabulated spectral density must be finite and nonnegative (knot {})", j),
                            {{"knot", j}});
    }
    if (j > 0 && values[j] < values[j - 1]) {
      throw ValidationError(fmt::format("tabulated spectral density must be nondecreasing (knot {})", j),
                            {{"knot", j}});
    }
  }
  auto const   K = values.size();
  double const h = 1.0 / static_cast<double>(K - 1);
  Distortion   d;
  d.gamma_ = -1.0;
  d.right_mass_.assign(K, 0.0);
  for (std::size_t j = K - 1; j-- > 0;) {
    d.right_mass_[j] = d.right_mass_[j + 1] + 0.5 * h * (values[j] + values[j + 1]);
  }
  if (std::abs(d.right_mass_[0] - 1.0) > 1e-10) {
    throw ValidationError(fmt::format("tabulated spectral density must integrate to 1 (integral is {:.12g})",
                                      d.right_mass_[0]));
  }
  d.table_ = std::move(values);
  return d;
}

auto Distortion::gamma() const -> std::optional<double>
{
  if (gamma_ > 0.0) { return gamma_; }
  return std::nullopt;
}

auto Distortion::density(double u) const -> double
{
  u = std::clamp(u, 0.0, 1.0);
  if (gamma_ > 0.0) { return u >= 1.0 ? kInf : (1.0 - gamma_) * std::pow(1.0 - u, -gamma_); }
  auto const   K = table_.size();
  double const h = 1.0 / static_cast<double>(K - 1);
  auto const   j = std::min(static_cast<std::size_t>(u / h), K - 2);
  double const w = (u - static_cast<double>(j) * h) / h;
  return (1.0 - w) * table_[j] + w * table_[j + 1];
}

auto Distortion::tail(double s) const -> double
{
  s = std::clamp(s, 0.0, 1.0);
  if (gamma_ > 0.0) { return std::pow(s, 1.0 - gamma_); }
  double const u = 1.0 - s;
  auto const   K = table_.size();
  double const h = 1.0 / static_cast<double>(K - 1);
  auto const   j = std::min(static_cast<std::size_t>(u / h), K - 2);
  double const upper = static_cast<double>(j + 1) * h;
  return right_mass_[j + 1] + 0.5 * (upper - u) * (density(u) + table_[j + 1]);
}

auto Distortion::cell_average(double a, double b) const -> double
{
  return (tail(1.0 - a) - tail(1.0 - b)) / (b - a);
}

auto Distortion::max_ratio(double intercept, double slope, double lo, double hi) const -> double
{
  double best = 0.0;
  auto   eval = [&](double s) {
    if (s > 0.0 && s >= lo && s <= hi) {
      double const t = tail(s);
      if (t > 0.0) { best = std::max(best, (intercept + slope * s) / t); }
    }
  };
  eval(lo);
  eval(hi);
  if (gamma_ > 0.0) {
    // d/ds (a + b s) s^(g-1) = s^(g-2) (a (g-1) + b g s)
    if (slope > 0.0) { eval(intercept * (1.0 - gamma_) / (slope * gamma_)); }
    return best;
  }
  // tabulated: tail is quadratic between knots in s = 1 - u
  auto const   K = table_.size();
  double const h = 1.0 / static_cast<double>(K - 1);
  std::vector<double> cuts{lo};
  for (std::size_t j = 0; j < K; ++j) {
    double const s = 1.0 - static_cast<double>(j) * h;
    if (s > lo && s < hi) { cuts.push_back(s); }
  }
  cuts.push_back(hi);
  std::ranges::sort(cuts);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double const l = cuts[k], r = cuts[k + 1];
    if (!(r > l)) { continue; }
    eval(l);
    eval(r);
    // fit tail(s) = c + d s + e s^2 through three points
    double const m = 0.5 * (l + r);
    double const fl = tail(l), fm = tail(m), fr = tail(r);
    double const e = ((fr - fm) / (r - m) - (fm - fl) / (m - l)) / (r - l);
    double const d = (fm - fl) / (m - l) - e * (l + m);
    double const c = fl - d * l - e * l * l;
    // numerator of the derivative: b c - a d - 2 a e s - b e s^2
    double const A = -slope * e, B = -2.0 * intercept * e, C = slope * c - intercept * d;
    if (std::abs(A) < 1e-300) {
      if (std::abs(B) > 1e-300) { eval(-C / B); }
    } else {
      double const disc = B * B - 4.0 * A * C;
      if (disc >= 0.0) {
        double const sq = std::sqrt(disc);
        eval((-B + sq) / (2.0 * A));
        eval((-B - sq) / (2.0 * A));
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------- specs

auto SeminormSpec::lp(double p) -> SeminormSpec
{
  if (!(p >= 1.0)) { throw ValidationError(fmt::format("Lp exponent must satisfy p >= 1, got {}", p)); }
  return SeminormSpec(LpNorm{p});
}

auto SeminormSpec::orlicz(YoungFunction young) -> SeminormSpec { return SeminormSpec(OrliczNorm{young}); }
auto SeminormSpec::spectral(double gamma) -> SeminormSpec { return spectral(Distortion::power(gamma)); }
auto SeminormSpec::spectral(Distortion sigma) -> SeminormSpec { return SeminormSpec(SpectralNorm{std::move(sigma)}); }

auto SeminormSpec::is_lp(double p) const -> bool
{
  auto const *lpn = std::get_if<LpNorm>(&family_);
  return lpn != nullptr && lpn->p == p;
}

auto SeminormSpec::label() const -> std::string
{
  return std::visit(overloaded{
                      [](LpNorm const &n) { return std::isinf(n.p) ? std::string("lp(inf)") : fmt::format("lp({:g})", n.p); },
                      [](OrliczNorm const &n) {
                        return n.young.kind() == YoungFunction::Kind::power
                                 ? fmt::format("orlicz(power {:g})", n.young.exponent())
                                 : std::string("orlicz(exp)");
                      },
                      [](SpectralNorm const &n) {
                        auto g = n.sigma.gamma();
                        return g ? fmt::format("spectral({:g})", *g)
                                 : fmt::format("spectral(table of {})", n.sigma.table().size());
                      }},
                    family_);
}

// ---------------------------------------------------------------- quantiles

auto quantile(FilteredSpace const &space, RandVar const &eta) -> std::vector<QuantileStep>
{
  std::vector<int> order(static_cast<std::size_t>(eta.size()));
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](int a, int b) { return eta[a] < eta[b]; });
  std::vector<QuantileStep> steps;
  double                    cum = 0.0;
  for (int i : order) {
    cum += space.prob(i);
    if (!steps.empty() && steps.back().value == eta[i]) {
      steps.back().upto = cum;
    } else {
      steps.push_back({cum, eta[i]});
    }
  }
  if (!steps.empty()) { steps.back().upto = 1.0; }
  return steps;
}

namespace {

auto lp_norm(double p, FilteredSpace const &space, RandVar const &xi) -> double
{
  double const top = xi.cwiseAbs().maxCoeff();
  if (std::isinf(p) || top == 0.0) { return top; }
  double s = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    s += space.prob(static_cast<int>(i)) * std::pow(std::abs(xi[i]) / top, p);
  }
  return top * std::pow(s, 1.0 / p);
}

auto conjugate_exponent(double p) -> double
{
  if (p == 1.0) { return kInf; }
  if (std::isinf(p)) { return 1.0; }
  return p / (p - 1.0);
}

// sup over s in (0,1] of (integral of the top-s mass of |xi|) / tail(s)
auto spectral_seminorm(Distortion const &sigma, FilteredSpace const &space, RandVar const &xi) -> double
{
  auto const steps = quantile(space, xi.cwiseAbs());
  double     best = 0.0, s = 0.0, mass = 0.0, prev_upto = 0.0;
  std::vector<std::pair<double, double>> cells; // (weight, value) in descending value order
  for (auto const &st : steps) {
    cells.emplace_back(st.upto - prev_upto, st.value);
    prev_upto = st.upto;
  }
  for (auto it = cells.rbegin(); it != cells.rend(); ++it) {
    auto const [w, v] = *it;
    if (v <= 0.0) { break; }
    best = std::max(best, sigma.max_ratio(mass - v * s, v, s, std::min(1.0, s + w)));
    mass += v * w;
    s += w;
  }
  return best;
}

struct OrliczPolar
{
  double value;
  double beta;
};

auto orlicz_polar(YoungFunction const &young, FilteredSpace const &space, RandVar const &eta) -> OrliczPolar
{
  RandVar const a   = eta.cwiseAbs();
  double const  top = a.maxCoeff();
  if (top == 0.0) { return {0.0, 0.0}; }
  auto h = [&](double beta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      s += space.prob(static_cast<int>(i)) * young.conjugate(a[i] / beta);
    }
    return beta * s + beta;
  };
  // h(beta) >= beta, so the minimizer lies below h(top)
  double       hi  = h(top);
  double       lo  = hi * 1e-12;
  double const phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double       x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double       f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < 400 && (hi - lo) > 1e-14 * hi; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = h(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = h(x2);
    }
  }
  double const beta = f1 <= f2 ? x1 : x2;
  return {std::min(f1, f2), beta};
}

} // namespace

auto seminorm(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &xi) -> double
{
  return std::visit(overloaded{[&](LpNorm const &n) { return lp_norm(n.p, space, xi); },
                               [&](OrliczNorm const &n) {
                                 return luxemburg(space, xi, [&](double x) { return n.young(x); });
                               },
                               [&](SpectralNorm const &n) { return spectral_seminorm(n.sigma, space, xi); }},
                    spec.family());
}

auto spectral_rho(Distortion const &sigma, FilteredSpace const &space, RandVar const &eta) -> double
{
  double rho = 0.0, prev = 0.0;
  for (auto const &st : quantile(space, eta)) {
    rho += st.value * (sigma.tail(1.0 - prev) - sigma.tail(1.0 - st.upto));
    prev = st.upto;
  }
  return rho;
}

auto polar(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta) -> double
{
  return std::visit(overloaded{[&](LpNorm const &n) { return lp_norm(conjugate_exponent(n.p), space, eta); },
                               [&](OrliczNorm const &n) { return orlicz_polar(n.young, space, eta).value; },
                               [&](SpectralNorm const &n) { return spectral_rho(n.sigma, space, eta.cwiseAbs()); }},
                    spec.family());
}

auto conjugate_luxemburg(YoungFunction const &young, FilteredSpace const &space, RandVar const &eta) -> double
{
  return luxemburg(space, eta, [&](double y) { return young.conjugate(y); });
}

auto polar_witness(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta) -> RandVar
{
  auto const n  = eta.size();
  RandVar    xi = RandVar::Zero(n);
  if (eta.cwiseAbs().maxCoeff() == 0.0) { return xi; }
  std::visit(overloaded{
               [&](LpNorm const &lpn) {
                 double const q = conjugate_exponent(lpn.p);
                 if (std::isinf(q)) {
                   double const top = eta.cwiseAbs().maxCoeff();
                   for (Eigen::Index i = 0; i < n; ++i) {
                     if (std::abs(eta[i]) == top) { xi[i] = sign(eta[i]); }
                   }
                 } else {
                   for (Eigen::Index i = 0; i < n; ++i) { xi[i] = sign(eta[i]) * std::pow(std::abs(eta[i]), q - 1.0); }
                 }
               },
               [&](OrliczNorm const &o) {
                 double const beta = orlicz_polar(o.young, space, eta).beta;
                 for (Eigen::Index i = 0; i < n; ++i) {
                   xi[i] = sign(eta[i]) * o.young.conjugate_slope(std::abs(eta[i]) / beta);
                 }
               },
               [&](SpectralNorm const &s) {
                 RandVar const a    = eta.cwiseAbs();
                 double        prev = 0.0;
                 for (auto const &st : quantile(space, a)) {
                   double const avg = s.sigma.cell_average(prev, st.upto);
                   for (Eigen::Index i = 0; i < n; ++i) {
                     if (a[i] == st.value && st.value > 0.0) { xi[i] = sign(eta[i]) * avg; }
                   }
                   prev = st.upto;
                 }
               }},
             spec.family());
  double const norm = seminorm(spec, space, xi);
  if (norm > 0.0) { xi /= norm; }
  return xi;
}

auto choquet_integral(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta) -> double
{
  if (eta.size() > 0 && eta.minCoeff() < 0.0) {
    throw std::invalid_argument("choquet_integral needs a nonnegative random variable");
  }
  std::vector<double> levels(eta.data(), eta.data() + eta.size());
  std::ranges::sort(levels);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double total = 0.0, prev = 0.0;
  for (double s : levels) {
    if (s <= 0.0) { continue; }
    RandVar const layer = (eta.array() >= s).cast<double>().matrix();
    total += (s - prev) * polar(spec, space, layer);
    prev = s;
  }
  return total;
}

// ---------------------------------------------------------------- oracle

namespace {

struct Simplex
{
  std::vector<Eigen::VectorXd> points;
  std::vector<double>          values;
};

// Minimizes f from x0 with an initial simplex of edge `scale`.
template <typename F>
auto nelder_mead(F const &f, Eigen::VectorXd const &x0, double scale, int iterations) -> std::pair<Eigen::VectorXd, double>
{
  auto const n = x0.size();
  Simplex    s;
  s.points.push_back(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = x0;
    p[i] += scale;
    s.points.push_back(p);
  }
  for (auto const &p : s.points) { s.values.push_back(f(p)); }
  std::vector<std::size_t> idx(s.points.size());
  for (int it = 0; it < iterations; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::ranges::sort(idx, [&](auto a, auto b) { return s.values[a] < s.values[b]; });
    auto const best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];
    if (std::abs(s.values[worst] - s.values[best]) <= 1e-15 * (1.0 + std::abs(s.values[best]))) { break; }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) { centroid += s.points[idx[k]]; }
    centroid /= static_cast<double>(n);
    Eigen::VectorXd const refl = centroid + (centroid - s.points[worst]);
    double const          fr   = f(refl);
    if (fr < s.values[best]) {
      Eigen::VectorXd const exp = centroid + 2.0 * (centroid - s.points[worst]);
      double const          fe  = f(exp);
      if (fe < fr) {
        s.points[worst] = exp;
        s.values[worst] = fe;
      } else {
        s.points[worst] = refl;
        s.values[worst] = fr;
      }
    } else if (fr < s.values[second]) {
      s.points[worst] = refl;
      s.values[worst] = fr;
    } else {
      Eigen::VectorXd const con = centroid + 0.5 * (s.points[worst] - centroid);
      double const          fc  = f(con);
      if (fc < s.values[worst]) {
        s.points[worst] = con;
        s.values[worst] = fc;
      } else {
        for (auto k : idx) {
          if (k == best) { continue; }
          s.points[k] = s.points[best] + 0.5 * (s.points[k] - s.points[best]);
          s.values[k] = f(s.points[k]);
        }
      }
    }
  }
  auto const b = static_cast<std::size_t>(std::ranges::min_element(s.values) - s.values.begin());
  return {s.points[b], s.values[b]};
}

} // namespace

auto polar_oracle(SeminormSpec const &spec, FilteredSpace const &space, RandVar const &eta, int restarts,
                  int iterations, std::uint64_t seed) -> OracleResult
{
  RandVar const a = eta.cwiseAbs();
  std::vector<double> levels;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) { levels.push_back(a[i]); }
  }
  std::ranges::sort(levels);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  OracleResult result{0.0, RandVar::Zero(eta.size())};
  if (levels.empty()) { return result; }
  auto const        k = static_cast<Eigen::Index>(levels.size());
  std::vector<int> level_of(static_cast<std::size_t>(a.size()), -1);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) { level_of[i] = static_cast<int>(std::ranges::lower_bound(levels, a[i]) - levels.begin()); }
  }
  // theta -> xi: increments theta_j^2 accumulate over increasing |eta| levels
  auto build = [&](Eigen::VectorXd const &theta) {
    Eigen::VectorXd cum(k);
    double          run = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      run += theta[j] * theta[j];
      cum[j] = run;
    }
    RandVar xi = RandVar::Zero(eta.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (level_of[i] >= 0) { xi[i] = sign(eta[i]) * cum[level_of[i]]; }
    }
    return xi;
  };
  auto objective = [&](Eigen::VectorXd const &theta) {
    RandVar const xi = build(theta);
    double const  p  = seminorm(spec, space, xi);
    if (!(p > 0.0)) { return 0.0; }
    return -space.expectation(xi.cwiseProduct(eta)) / p;
  };

  Rng                              rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd                  best_theta;
  double                           best = kInf;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Eigen::VectorXd theta(k);
    for (Eigen::Index j = 0; j < k; ++j) { theta[j] = normal(rng); }
    double scale = 0.5;
    auto [x, fx] = nelder_mead(objective, theta, scale, iterations);
    // restart from the incumbent with shrinking simplices until it stalls
    for (int polish = 0; polish < 12; ++polish) {
      scale *= 0.5;
      auto [x2, f2] = nelder_mead(objective, x, scale * std::max(1.0, x.cwiseAbs().maxCoeff()), iterations);
      bool const improved = f2 < fx - 1e-15 * std::abs(fx);
      if (f2 < fx) {
        x  = x2;
        fx = f2;
      }
      if (!improved && polish > 2) { break; }
    }
    if (fx < best) {
      best       = fx;
      best_theta = x;
    }
  }
  RandVar      xi = build(best_theta);
  double const p  = seminorm(spec, space, xi);
  if (p > 0.0) { xi /= p; }
  result.value   = std::max(0.0, -best);
  result.witness = xi;
  return result;
}

// ---------------------------------------------------------------- property audit

auto PropertyReport::worst() const -> Status
{
  Status w = Status::pass;
  for (auto const &item : items) {
    if (item.status == Status::fail) { return Status::fail; }
    if (item.status == Status::finding) { w = Status::finding; }
  }
  return w;
}

namespace {

auto to_json_vector(RandVar const &v) -> nlohmann::json
{
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

} // namespace

auto check_properties(SeminormSpec const &spec, FilteredSpace const &space, int samples, std::uint64_t seed,
                      double tol, double bound) -> PropertyReport
{
  PropertyReport report{spec, {}};
  int const      n = space.atom_count();
  Rng            rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // Jensen-type inequalities are proven for Lp and Orlicz; for the spectral
  // family on atomic spaces a violation is reported as a finding.
  Status const jensen_violation = spec.is_spectral() ? Status::finding : Status::fail;

  Verdict lsc;
  lsc.name   = "lower-semicontinuity";
  lsc.status = Status::pass;
  lsc.kind   = MarginKind::estimate;
  lsc.note   = "automatic: finite-dimensional continuity";
  report.items.push_back(lsc);

  double         mono_slack = kInf;
  nlohmann::json mono_witness;
  double         fitted     = 1.0;
  double         cont_slack = kInf;
  nlohmann::json cont_witness;
  double         trunc_slack = kInf;
  nlohmann::json trunc_witness;
  bool           degenerate = false;

  std::vector<RandVar> draws;
  for (int s = 0; s < samples; ++s) { draws.push_back(random_randvar(rng, n)); }

  for (auto const &big : draws) {
    RandVar small = big;
    for (int i = 0; i < n; ++i) { small[i] *= unit(rng); }
    double const pb = seminorm(spec, space, big), ps = seminorm(spec, space, small);
    if (pb - ps < mono_slack) {
      mono_slack   = pb - ps;
      mono_witness = {{"dominating", to_json_vector(big)}, {"dominated", to_json_vector(small)}};
    }

    double const top = big.cwiseAbs().maxCoeff();
    if (top > 0.0) {
      double const l1 = space.expectation(big.cwiseAbs());
      if (!(pb > 0.0)) { degenerate = true; }
      fitted = std::max({fitted, l1 / pb, pb / top});

      // decreasing to zero: (|xi| - nu top / 8)^+
      double prev = seminorm(spec, space, big.cwiseAbs());
      for (int nu = 1; nu <= 8; ++nu) {
        RandVar const shrunk = (big.cwiseAbs().array() - top * nu / 8.0).max(0.0).matrix();
        double const  cur    = seminorm(spec, space, shrunk);
        double const  slack  = nu == 8 ? -cur : prev - cur;
        if (slack < cont_slack) {
          cont_slack   = slack;
          cont_witness = {{"xi", to_json_vector(big)}, {"step", nu}};
        }
        prev = cur;
      }

      // truncation xi 1{|xi| >= nu} over the levels of |xi|, zero beyond the max
      std::vector<double> lv(big.data(), big.data() + n);
      for (auto &x : lv) { x = std::abs(x); }
      std::ranges::sort(lv);
      double last = kInf;
      for (double nu : lv) {
        RandVar const cut = (big.cwiseAbs().array() >= nu).select(big, 0.0);
        double const  cur = seminorm(spec, space, cut);
        if (last - cur < trunc_slack) {
          trunc_slack   = last - cur;
          trunc_witness = {{"xi", to_json_vector(big)}, {"level", nu}};
        }
        last = cur;
      }
      RandVar const beyond = (big.cwiseAbs().array() > top).select(big, 0.0);
      double const  zero   = seminorm(spec, space, beyond);
      if (-zero < trunc_slack) {
        trunc_slack   = -zero;
        trunc_witness = {{"xi", to_json_vector(big)}, {"level", "beyond max"}};
      }
    }
  }
  report.items.push_back(inequality_verdict("monotonicity", mono_slack, tol, mono_witness));

  Verdict sandwich;
  sandwich.name   = "norm-sandwich";
  sandwich.kind   = MarginKind::estimate;
  sandwich.margin = fitted;
  sandwich.status = degenerate ? Status::fail : Status::pass;
  sandwich.note   = "fitted c with ||xi||_1 / c <= p(xi) <= c ||xi||_inf";
  report.items.push_back(sandwich);

  report.items.push_back(inequality_verdict("order-continuity", cont_slack, tol, cont_witness));
  report.items.push_back(inequality_verdict("truncation", trunc_slack, tol, trunc_witness));

  auto const times = enumerate_stopping_times(space, bound);
  double         jen = kInf, pjen = kInf;
  nlohmann::json jen_witness, pjen_witness;
  for (auto const &xi : draws) {
    double const p  = seminorm(spec, space, xi);
    double const pp = polar(spec, space, xi);
    for (auto const &tau : times) {
      RandVar const cx = cond_exp_at(space, xi, tau);
      double const  s1 = p - seminorm(spec, space, cx);
      double const  s2 = pp - polar(spec, space, cx);
      if (s1 < jen) {
        jen         = s1;
        jen_witness = {{"xi", to_json_vector(xi)}, {"tau", tau.times()}};
      }
      if (s2 < pjen) {
        pjen         = s2;
        pjen_witness = {{"eta", to_json_vector(xi)}, {"tau", tau.times()}};
      }
    }
  }
  report.items.push_back(inequality_verdict("jensen", jen, tol, jen_witness, jensen_violation));
  report.items.push_back(inequality_verdict("polar-jensen", pjen, tol, pjen_witness, jensen_violation));
  return report;
}

auto doob_constant(SeminormSpec const &p, SeminormSpec const &p_prime, FilteredSpace const &space, int samples,
                   std::uint64_t seed) -> DoobEstimate
{
  int const    n = space.atom_count();
  int const    T = space.horizon();
  DoobEstimate est{0.0, RandVar::Zero(n), 0};
  auto         consider = [&](RandVar const &xi) {
    RandVar sup = RandVar::Zero(n);
    for (int t = 0; t <= T; ++t) { sup = sup.cwiseMax(cond_exp(space, xi, t).cwiseAbs()); }
    double const denom = seminorm(p_prime, space, cond_exp(space, xi, T));
    if (!(denom > 1e-300)) { return; }
    ++est.evaluated;
    double const ratio = seminorm(p, space, sup) / denom;
    if (ratio > est.estimate) {
      est.estimate = ratio;
      est.witness  = xi;
    }
  };
  // indicators of atoms and of blocks are the classical maximal-function extremals
  for (int i = 0; i < n; ++i) { consider(RandVar::Unit(n, i)); }
  for (int t = 0; t <= T; ++t) {
    for (auto const &block : space.partition(t).blocks) {
      RandVar ind = RandVar::Zero(n);
      for (int a : block) { ind[a] = 1.0; }
      consider(ind);
    }
  }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) { consider(random_randvar(rng, n)); }
  return est;
}

} // namespace optdual
