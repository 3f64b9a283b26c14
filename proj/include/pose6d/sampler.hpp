#pragma once

#include "pose6d/geom.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace pose6d {

struct SamplerConfig {
  int subdivision_level = 1;
  double in_plane_step = std::numbers::pi / 3.0;
  /// Absent disables the visibility prune.
  std::optional<double> visibility_sigma;
  /// Canonical template distance in object diameters.
  double depth_alpha = 10.0;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Colored point-cloud object model, object frame in meters.
class ObjectModel {
 public:
  ObjectModel() = default;

  /// Computes the diameter (maximum pairwise distance). Throws
  /// std::invalid_argument for fewer than 4 points, all-coplanar points,
  /// mismatched color count or non-finite coordinates.
  static ObjectModel create(int id, std::vector<Eigen::Vector3d> points,
                            std::vector<std::array<std::uint8_t, 3>> colors);

  int id() const { return id_; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const std::vector<std::array<std::uint8_t, 3>>& colors() const { return colors_; }
  double diameter() const { return diameter_; }
  std::size_t size() const { return points_.size(); }

 private:
  int id_ = 0;
  std::vector<Eigen::Vector3d> points_;
  std::vector<std::array<std::uint8_t, 3>> colors_;
  double diameter_ = 0.0;
};

/// Maximum pairwise distance, exact.
double point_set_diameter(const std::vector<Eigen::Vector3d>& points);

/// Unit icosphere vertices at the given subdivision level, sorted
/// lexicographically on coordinates quantized to 1e-9.
std::vector<Eigen::Vector3d> icosphere_vertices(int subdivision_level);

/// Object-to-camera rotation for a camera sitting on the unit direction
/// `viewpoint` (object frame) and looking at the object origin: the optical
/// axis expressed in the object frame is -viewpoint. Image "up" follows world
/// +y projected into the view plane, or +x at the poles.
Rotation look_at_rotation(const Eigen::Vector3d& viewpoint);

/// One rotation per icosphere vertex, in vertex order.
std::vector<Rotation> sample_viewpoints(const SamplerConfig& cfg);

/// Keeps rotations whose canonical camera center t(R) = -alpha*D*R^T e_z
/// satisfies e_z . t(R) >= sigma * D. Order-preserving; passthrough when sigma
/// is absent.
std::vector<Rotation> filter_visible(const std::vector<Rotation>& views, const ObjectModel& model,
                                     const SamplerConfig& cfg);

/// Rolls every view about the optical axis by theta in {0, step, 2 step, ...}
/// (view-major, theta ascending). Throws std::invalid_argument unless the
/// step divides 2*pi within 1e-9.
std::vector<Rotation> augment_in_plane(const std::vector<Rotation>& views, const SamplerConfig& cfg);

/// Pose(view, (0, 0, alpha * D)).
Pose template_pose(const Rotation& view, const ObjectModel& model, const SamplerConfig& cfg);

/// sample_viewpoints -> filter_visible -> augment_in_plane.
std::vector<Rotation> rotation_hypotheses(const ObjectModel& model, const SamplerConfig& cfg);

}  // namespace pose6d
