#pragma once

#include <Eigen/Core>

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace optdual {

/// A random variable: one real value per atom.
using RandVar = Eigen::VectorXd;

/// A raw process on the grid {0,...,T}: rows are atoms, columns are times.
using Process = Eigen::MatrixXd;

/// Default cap on the number of candidates an exhaustive enumeration may produce.
inline constexpr double kDefaultEnumerationBound = 1e6;

/// A partition of the atom indices {0,...,n-1}. Blocks are ordered by their
/// smallest atom and list their atoms in increasing order.
struct Partition
{
  std::vector<int>              block_of;
  std::vector<std::vector<int>> blocks;

  Partition() = default;
  /// Builds from a block list; throws ValidationError unless the blocks
  /// cover {0,...,atoms-1} exactly once.
  Partition(int atoms, std::vector<std::vector<int>> blocks);

  static auto discrete(int atoms) -> Partition;
  static auto trivial(int atoms) -> Partition;

  auto size() const -> int { return static_cast<int>(blocks.size()); }
  auto atoms() const -> int { return static_cast<int>(block_of.size()); }
  /// True if every block of `this` lies inside a block of `coarser`.
  auto refines(Partition const &coarser) const -> bool;

  friend auto operator==(Partition const &, Partition const &) -> bool = default;
};

/// Finite probability space with a refining partition filtration F_0,...,F_T.
/// The full sigma-algebra is the discrete one on the atoms; F_T may be coarser.
class FilteredSpace
{
public:
  FilteredSpace(std::vector<std::string> atoms, std::vector<double> prob, std::vector<Partition> filtration);

  auto atom_count() const -> int { return static_cast<int>(atoms_.size()); }
  auto horizon() const -> int { return static_cast<int>(filtration_.size()) - 1; }
  auto atoms() const -> std::vector<std::string> const & { return atoms_; }
  auto prob() const -> RandVar const & { return prob_; }
  auto prob(int atom) const -> double { return prob_[atom]; }
  auto partition(int t) const -> Partition const &;
  auto filtration() const -> std::vector<Partition> const & { return filtration_; }
  /// Block counts b_t of every partition.
  auto block_counts() const -> std::vector<int>;
  auto atom_index(std::string_view label) const -> int;

  auto expectation(RandVar const &xi) const -> double { return prob_.dot(xi); }

private:
  std::vector<std::string> atoms_;
  RandVar                  prob_;
  std::vector<Partition>   filtration_;
};

/// Probability-weighted block averages of `xi` over `part`.
auto cond_exp(FilteredSpace const &space, RandVar const &xi, Partition const &part) -> RandVar;
/// E[xi | F_t].
auto cond_exp(FilteredSpace const &space, RandVar const &xi, int t) -> RandVar;

/// Largest deviation of `xi` from its block averages, i.e. how far `xi` is
/// from being measurable with respect to `part` (0 for measurable xi).
auto measurability_defect(FilteredSpace const &space, RandVar const &xi, Partition const &part) -> double;

/// A stopping time with values in {0,...,T}. Construct through `make`, which
/// checks {tau <= t} in F_t for all t.
class StoppingTime
{
public:
  static auto make(FilteredSpace const &space, std::vector<int> times) -> StoppingTime;
  /// The constant time t.
  static auto constant(FilteredSpace const &space, int t) -> StoppingTime;

  auto operator()(int atom) const -> int { return times_[atom]; }
  auto times() const -> std::vector<int> const & { return times_; }
  /// {tau = t} in F_{t-1} for t >= 1 and {tau = 0} in F_0.
  auto predictable() const -> bool { return predictable_; }
  /// Pointwise order tau <= sigma.
  auto precedes(StoppingTime const &other) const -> bool;

  friend auto operator==(StoppingTime const &a, StoppingTime const &b) -> bool { return a.times_ == b.times_; }
  friend auto operator<=>(StoppingTime const &a, StoppingTime const &b) { return a.times_ <=> b.times_; }

private:
  StoppingTime(std::vector<int> times, bool predictable)
    : times_(std::move(times))
    , predictable_(predictable)
  {
  }

  std::vector<int> times_;
  bool             predictable_ = false;
};

/// First t at which {tau <= t} fails to be F_t-measurable, if any.
auto stopping_time_violation(FilteredSpace const &space, std::vector<int> const &times) -> std::optional<int>;
auto is_predictable_time(FilteredSpace const &space, std::vector<int> const &times) -> bool;

/// The partition generating F_tau: blocks of F_t intersected with {tau = t}.
auto stopped_partition(FilteredSpace const &space, StoppingTime const &tau) -> Partition;
/// E[xi | F_tau].
auto cond_exp_at(FilteredSpace const &space, RandVar const &xi, StoppingTime const &tau) -> RandVar;

/// Number of stopping times, computed over the partition tree without enumerating.
auto count_stopping_times(FilteredSpace const &space) -> double;
/// Every stopping time, lexicographically ordered by its value vector over atoms.
auto enumerate_stopping_times(FilteredSpace const &space, double bound = kDefaultEnumerationBound)
  -> std::vector<StoppingTime>;
/// All pointwise nondecreasing tuples (tau_0 <= ... <= tau_n).
auto enumerate_stopping_sequences(FilteredSpace const &space, int n, double bound = kDefaultEnumerationBound)
  -> std::vector<std::vector<StoppingTime>>;

} // namespace optdual
