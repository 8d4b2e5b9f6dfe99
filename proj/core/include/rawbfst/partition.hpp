#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rawbfst/random.hpp"

namespace rawbfst {

/// Half-open cubes prod_d (h i_d, h (i_d + 1)] of edge h whose closure meets
/// the closed ball of radius r1 around the origin, in lexicographic order of i.
class CubicPartition {
 public:
  static constexpr std::size_t kDefaultMaxCubes = 10'000'000;

  /// Throws ConfigError for non-positive h or r1, or if more than `max_cubes` cubes would be produced.
  static CubicPartition build(int dim, double h, double r1, std::size_t max_cubes = kDefaultMaxCubes);

  int dim() const { return dim_; }
  double edge() const { return h_; }
  double radius() const { return r1_; }
  std::size_t size() const { return count_; }

  /// Integer index i of cube `ordinal` (length dim).
  std::span<const int> index(std::size_t ordinal) const;
  /// Center a_i = h (i + 1/2).
  std::vector<double> center(std::size_t ordinal) const;

  /// Ordinal of the cube containing x, if it is listed.
  std::optional<std::size_t> locate(std::span<const double> x) const;

  /// Uniform draw on the half-open cube; each component is h i_d + h u with u in (0, 1].
  void sample_uniform(std::size_t ordinal, PhiloxStream& rng, std::span<double> out) const;

  /// Cell index k with h k < x <= h (k + 1), consistent with sample_uniform.
  int cell_of(double x) const;

 private:
  CubicPartition(int dim, double h, double r1) : dim_(dim), h_(h), r1_(r1) {}

  int dim_;
  double h_;
  double r1_;
  std::size_t count_ = 0;
  std::vector<int> indices_;  // count_ x dim_, lexicographically sorted
};

}  // namespace rawbfst
