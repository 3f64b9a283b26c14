#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

namespace pose6d {

/// Unit quaternion rotation. Always stored normalized and in canonical form
/// (w >= 0, and when w == 0 the first nonzero of x, y, z is positive), so two
/// equal rotations have bit-comparable storage.
class Rotation {
 public:
  Rotation() = default;

  /// Normalizes and canonicalizes. Throws std::invalid_argument on a zero or
  /// non-finite quaternion.
  static Rotation from_quaternion(double w, double x, double y, double z);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);

  /// Projects onto SO(3) first, so slightly non-orthonormal input is fine.
  static Rotation from_matrix(const Eigen::Matrix3d& m);

  /// Exponential map of an axis-angle vector (any norm).
  static Rotation exp(const Eigen::Vector3d& axis_angle);

  static Rotation about_z(double theta);

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }

  /// Axis-angle vector with norm in [0, pi].
  Eigen::Vector3d log() const;
  double angle() const;

  Rotation inverse() const;

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }
  friend Rotation operator*(const Rotation& a, const Rotation& b);

 private:
  explicit Rotation(const Eigen::Quaterniond& q);
  Eigen::Quaterniond q_{1.0, 0.0, 0.0, 0.0};
};

/// Geodesic angle between two rotations, in [0, pi].
double angular_distance(const Rotation& a, const Rotation& b);

/// Rigid transform mapping object-frame points into the camera frame:
/// p_cam = rotation * p_obj + translation (meters).
class Pose {
 public:
  Pose() = default;
  /// Throws std::invalid_argument on non-finite translation.
  Pose(const Rotation& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return {}; }
  static Pose translate(double x, double y, double z);

  const Rotation& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

  Eigen::Matrix4d matrix() const;

 private:
  Rotation rotation_;
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// a after b: compose(a, b) * p == a * (b * p).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// so(3) x R^3 increment. The rotation part is an axis-angle vector on the
/// principal branch (norm < pi); the translation part is additive.
struct TangentUpdate {
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Throws std::domain_error for non-finite values or |rotation| >= pi.
  void validate() const;
};

/// Pose(exp(u.rotation), u.translation).
Pose exp_update(const TangentUpdate& u);

/// Pinhole intrinsics plus raster size and the metric scale of stored depth.
class CameraModel {
 public:
  CameraModel() = default;
  /// Throws std::invalid_argument unless fx, fy > 0, width, height >= 1 and
  /// depth_scale > 0.
  CameraModel(double fx, double fy, double cx, double cy, int width, int height,
              double depth_scale = 0.001);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double depth_scale() const { return depth_scale_; }

  Eigen::Matrix3d K() const;

  /// Continuous pixel coordinates; std::nullopt when z <= 0.
  std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& p) const;

  /// z * K^-1 [u, v, 1]. Throws std::invalid_argument when z <= 0.
  Eigen::Vector3d backproject(double u, double v, double z) const;

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;

 private:
  double fx_ = 1.0, fy_ = 1.0, cx_ = 0.0, cy_ = 0.0;
  int width_ = 1, height_ = 1;
  double depth_scale_ = 0.001;
};

}  // namespace pose6d
