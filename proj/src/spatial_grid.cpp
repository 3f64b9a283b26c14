#include "pose6d/spatial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pose6d {

NearestNeighborGrid::NearestNeighborGrid(std::span<const Eigen::Vector3d> points, double cell_size)
    : points_(points.begin(), points.end()), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("nn grid: cell size must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Eigen::Vector3i c = cell_of(points_[i]);
    if (i == 0) {
      lo_ = hi_ = c;
    } else {
      lo_ = lo_.cwiseMin(c);
      hi_ = hi_.cwiseMax(c);
    }
    cells_[key(c)].push_back(i);
  }
}

Eigen::Vector3i NearestNeighborGrid::cell_of(const Eigen::Vector3d& p) const {
  return {static_cast<int>(std::floor(p.x() / cell_)), static_cast<int>(std::floor(p.y() / cell_)),
          static_cast<int>(std::floor(p.z() / cell_))};
}

NearestNeighborGrid::Key NearestNeighborGrid::key(const Eigen::Vector3i& c) {
  constexpr std::int64_t off = 1 << 20;
  return (static_cast<Key>(c.x() + off) << 42) | (static_cast<Key>(c.y() + off) << 21) |
         static_cast<Key>(c.z() + off);
}

std::optional<NearestNeighborGrid::Hit> NearestNeighborGrid::nearest(const Eigen::Vector3d& q,
                                                                     double max_distance) const {
  if (points_.empty()) return std::nullopt;
  const Eigen::Vector3i qc = cell_of(q);
  // Rings beyond this radius contain no occupied cells.
  int max_ring = 0;
  for (int a = 0; a < 3; ++a) max_ring = std::max({max_ring, std::abs(qc[a] - lo_[a]), std::abs(hi_[a] - qc[a])});

  std::size_t best = points_.size();
  double best_d2 = std::numeric_limits<double>::infinity();
  const auto visit = [&](const Eigen::Vector3i& c) {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < lo_[a] || c[a] > hi_[a]) return;
    }
    const auto it = cells_.find(key(c));
    if (it == cells_.end()) return;
    for (std::size_t i : it->second) {
      const double d2 = (points_[i] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
        best_d2 = d2;
        best = i;
      }
    }
  };

  for (int r = 0; r <= max_ring; ++r) {
    // Points outside ring r-1 are at least (r-1) cells away.
    const double reach = (r - 1) * cell_;
    if (r > 0 && (reach > max_distance || best_d2 < reach * reach)) break;
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        const bool edge = std::abs(dx) == r || std::abs(dy) == r;
        if (edge) {
          for (int dz = -r; dz <= r; ++dz) visit(qc + Eigen::Vector3i(dx, dy, dz));
        } else {
          visit(qc + Eigen::Vector3i(dx, dy, -r));
          if (r != 0) visit(qc + Eigen::Vector3i(dx, dy, r));
        }
      }
    }
  }
  if (best == points_.size()) return std::nullopt;
  const double d = std::sqrt(best_d2);
  if (d > max_distance) return std::nullopt;
  return Hit{best, d};
}

}  // namespace pose6d
