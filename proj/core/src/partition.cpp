#include "rawbfst/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rawbfst/error.hpp"

namespace rawbfst {

CubicPartition CubicPartition::build(int dim, double h, double r1, std::size_t max_cubes) {
  if (dim < 1) throw ConfigError("build_partition: dimension must be >= 1");
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("build_partition: edge length h must be positive");
  if (!(r1 > 0.0) || !std::isfinite(r1)) throw ConfigError("build_partition: radius r1 must be positive");

  CubicPartition part(dim, h, r1);
  const int lo = static_cast<int>(std::floor(-r1 / h)) - 1;
  const int hi = static_cast<int>(std::ceil(r1 / h));
  const auto width = static_cast<double>(hi - lo + 1);
  if (std::pow(width, dim) > 1e12) {
    throw ConfigError("build_partition: scan box too large for h = " + std::to_string(h));
  }

  // Squared distance from the origin to the closed 1-D interval [h k, h (k+1)].
  auto dist_sq = [h](int k) {
    const double a = h * k;
    const double b = h * (k + 1);
    if (a > 0.0) return a * a;
    if (b < 0.0) return b * b;
    return 0.0;
  };
  const double r1_sq = r1 * r1;

  std::vector<int> cur(static_cast<std::size_t>(dim), lo);
  // Odometer over the scan box, last coordinate fastest: lexicographic order.
  while (true) {
    double acc = 0.0;
    for (int v : cur) acc += dist_sq(v);
    if (acc <= r1_sq) {
      if (part.count_ >= max_cubes) {
        throw ConfigError("build_partition: cube count exceeds the configured maximum of " + std::to_string(max_cubes));
      }
      part.indices_.insert(part.indices_.end(), cur.begin(), cur.end());
      ++part.count_;
    }
    int d = dim - 1;
    while (d >= 0 && cur[static_cast<std::size_t>(d)] == hi) {
      cur[static_cast<std::size_t>(d)] = lo;
      --d;
    }
    if (d < 0) break;
    ++cur[static_cast<std::size_t>(d)];
  }
  return part;
}

std::span<const int> CubicPartition::index(std::size_t ordinal) const {
  if (ordinal >= count_) throw ConfigError("CubicPartition: ordinal out of range");
  return {indices_.data() + ordinal * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::vector<double> CubicPartition::center(std::size_t ordinal) const {
  const auto idx = index(ordinal);
  std::vector<double> a(idx.size());
  for (std::size_t d = 0; d < idx.size(); ++d) a[d] = h_ * (idx[d] + 0.5);
  return a;
}

int CubicPartition::cell_of(double x) const {
  auto k = static_cast<int>(std::ceil(x / h_)) - 1;
  // Repair rounding so that membership matches the bounds h k and h (k+1) exactly.
  if (x <= h_ * k) --k;
  else if (x > h_ * (k + 1)) ++k;
  return k;
}

std::optional<std::size_t> CubicPartition::locate(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_)) throw ConfigError("locate: dimension mismatch");
  const double limit = r1_ + 2.0 * h_;
  std::vector<int> key(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (!(std::abs(x[d]) <= limit)) return std::nullopt;
    key[d] = cell_of(x[d]);
  }
  // Binary search over the lexicographically sorted index rows.
  std::size_t first = 0;
  std::size_t len = count_;
  const auto D = static_cast<std::size_t>(dim_);
  while (len > 0) {
    const std::size_t half = len / 2;
    const std::size_t mid = first + half;
    const int* row = indices_.data() + mid * D;
    if (std::lexicographical_compare(row, row + D, key.begin(), key.end())) {
      first = mid + 1;
      len -= half + 1;
    } else {
      len = half;
    }
  }
  if (first < count_ && std::equal(key.begin(), key.end(), indices_.data() + first * D)) return first;
  return std::nullopt;
}

void CubicPartition::sample_uniform(std::size_t ordinal, PhiloxStream& rng, std::span<double> out) const {
  const auto idx = index(ordinal);
  if (out.size() != idx.size()) throw ConfigError("sample_uniform: output dimension mismatch");
  for (std::size_t d = 0; d < idx.size(); ++d) {
    const double lower = h_ * idx[d];
    const double upper = h_ * (idx[d] + 1);
    double v = lower + h_ * rng.uniform_open_closed();
    if (v > upper) v = upper;
    if (v <= lower) v = std::nextafter(lower, upper);
    out[d] = v;
  }
}

}  // namespace rawbfst
