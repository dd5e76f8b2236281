#pragma once

#include "optdual/filtered_space.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace optdual::test {

/// Four uniform atoms a,b,c,d; F0 trivial, F1 = {{a,b},{c,d}}, F2 discrete.
inline auto s4() -> FilteredSpace
{
  return FilteredSpace({"a", "b", "c", "d"}, {0.25, 0.25, 0.25, 0.25},
                       {Partition::trivial(4), Partition(4, {{0, 1}, {2, 3}}), Partition::discrete(4)});
}

/// Two atoms, T = 1, F0 trivial, F1 discrete.
inline auto two_atoms() -> FilteredSpace
{
  return FilteredSpace({"h", "t"}, {0.5, 0.5}, {Partition::trivial(2), Partition::discrete(2)});
}

/// Uniform binary tree with 2^depth atoms; F_t splits every block in two.
inline auto dyadic(int depth) -> FilteredSpace
{
  int const                n = 1 << depth;
  std::vector<std::string> atoms;
  for (int i = 0; i < n; ++i) { atoms.push_back("w" + std::to_string(i)); }
  std::vector<Partition> parts;
  for (int t = 0; t <= depth; ++t) {
    int const                     size = n >> t;
    std::vector<std::vector<int>> blocks;
    for (int start = 0; start < n; start += size) {
      std::vector<int> b(static_cast<std::size_t>(size));
      std::iota(b.begin(), b.end(), start);
      blocks.push_back(b);
    }
    parts.emplace_back(n, blocks);
  }
  return FilteredSpace(atoms, std::vector<double>(static_cast<std::size_t>(n), 1.0 / n), parts);
}

inline auto rv(std::vector<double> const &v) -> RandVar
{
  return Eigen::Map<RandVar const>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Process from a time-major list of columns.
inline auto process(std::vector<std::vector<double>> const &cols) -> Process
{
  Process y(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t t = 0; t < cols.size(); ++t) { y.col(static_cast<Eigen::Index>(t)) = rv(cols[t]); }
  return y;
}

} // namespace optdual::test
