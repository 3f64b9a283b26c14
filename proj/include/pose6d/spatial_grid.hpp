#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace pose6d {

/// Exact nearest-neighbour search over a fixed 3D point set using a uniform
/// hash grid. Queries scan grid shells outward until no closer point can
/// exist, so results match a brute-force scan (ties: lowest index).
class NearestNeighborGrid {
 public:
  NearestNeighborGrid(std::span<const Eigen::Vector3d> points, double cell_size);

  struct Hit {
    std::size_t index;
    double distance;
  };

  /// Nearest point, or nullopt when the set is empty or nothing lies within
  /// max_distance.
  std::optional<Hit> nearest(const Eigen::Vector3d& q,
                             double max_distance = std::numeric_limits<double>::infinity()) const;

  std::size_t size() const { return points_.size(); }

 private:
  using Key = std::uint64_t;
  Eigen::Vector3i cell_of(const Eigen::Vector3d& p) const;
  static Key key(const Eigen::Vector3i& c);

  std::vector<Eigen::Vector3d> points_;
  double cell_;
  Eigen::Vector3i lo_ = Eigen::Vector3i::Zero(), hi_ = Eigen::Vector3i::Zero();
  std::unordered_map<Key, std::vector<std::size_t>> cells_;
};

}  // namespace pose6d
