#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rdiff {

/// Finite point set in R^dim with a certified lower bound on pairwise distances.
///
/// Coordinates are stored row-major (point i occupies [i*dim, (i+1)*dim)).
/// Construction validates the invariants exactly: no epsilon is used when
/// comparing distances against min_dist.
class PointSet {
 public:
  PointSet(int dim, std::vector<double> coords, double min_dist, std::string label);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / static_cast<std::size_t>(dim_); }
  double min_dist() const noexcept { return min_dist_; }
  const std::string& label() const noexcept { return label_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const noexcept { return coords_; }

  /// Writes `# dim=<d> min_dist=<a> label=<s>` followed by one CSV row per point.
  std::string to_csv() const;
  static PointSet from_csv(const std::string& text);

 private:
  int dim_;
  std::vector<double> coords_;
  double min_dist_;
  std::string label_;
};

/// All points of spacing * Z^dim inside the closed ball of the given radius.
PointSet lattice(int dim, double spacing, double radius);

/// First n_points left endpoints of the Fibonacci substitution tiling
/// (L -> LS, S -> L) with tile lengths golden_ratio * short_len and short_len.
PointSet fibonacci_chain(int n_points, double short_len);

/// Random sequential adsorption in the ball of the given radius.
PointSet hardcore_random(int dim, double min_dist, double radius, std::uint64_t seed);

/// Number of consecutive rejected candidates after which RSA stops.
inline constexpr int kRsaRejectionBudget = 2000;

struct MinDistance {
  double value;     // +inf when the set has a single point
  bool single_point;
};

/// Exact O(n^2) minimum over all pairwise Euclidean distances.
MinDistance verify_min_distance(const PointSet& ps);

double distance(std::span<const double> a, std::span<const double> b);

}  // namespace rdiff
