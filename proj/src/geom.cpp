#include "pose6d/geom.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pose6d {

namespace {

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("rotation: zero or non-finite quaternion");
  }
  // Already-unit input is kept bit-exact so canonicalization is idempotent.
  if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) q.coeffs() /= n;
  bool flip = q.w() < 0.0;
  if (q.w() == 0.0) {
    for (double c : {q.x(), q.y(), q.z()}) {
      if (c != 0.0) {
        flip = c < 0.0;
        break;
      }
    }
  }
  if (flip) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(canonical(q)) {}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  return Rotation(Eigen::Quaterniond(w, x, y, z));
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q) { return Rotation(q); }

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = svd.matrixU() * d * svd.matrixV().transpose();
  return Rotation(Eigen::Quaterniond(r));
}

Rotation Rotation::exp(const Eigen::Vector3d& v) {
  const double theta = v.norm();
  double w, s;
  if (theta < 1e-8) {
    // sin(theta/2)/theta ~ 1/2 - theta^2/48
    w = 1.0 - theta * theta / 8.0;
    s = 0.5 - theta * theta / 48.0;
  } else {
    w = std::cos(0.5 * theta);
    s = std::sin(0.5 * theta) / theta;
  }
  return Rotation(Eigen::Quaterniond(w, s * v.x(), s * v.y(), s * v.z()));
}

Rotation Rotation::about_z(double theta) { return exp(Eigen::Vector3d(0.0, 0.0, theta)); }

Eigen::Vector3d Rotation::log() const {
  const Eigen::Vector3d xyz = q_.vec();
  const double s = xyz.norm();
  if (s < 1e-12) return 2.0 * xyz / q_.w();
  const double theta = 2.0 * std::atan2(s, q_.w());
  return xyz * (theta / s);
}

double Rotation::angle() const { return 2.0 * std::atan2(q_.vec().norm(), q_.w()); }

Rotation Rotation::inverse() const { return Rotation(q_.conjugate()); }

Rotation operator*(const Rotation& a, const Rotation& b) { return Rotation(a.q_ * b.q_); }

double angular_distance(const Rotation& a, const Rotation& b) {
  return (a.inverse() * b).angle();
}

Pose::Pose(const Rotation& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!translation_.allFinite()) throw std::invalid_argument("pose: non-finite translation");
}

Pose Pose::translate(double x, double y, double z) { return Pose(Rotation(), {x, y, z}); }

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

Pose inverse(const Pose& p) {
  const Rotation r = p.rotation().inverse();
  return Pose(r, -(r * p.translation()));
}

void TangentUpdate::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::domain_error("tangent update: non-finite component");
  }
  if (rotation.norm() >= std::numbers::pi) {
    throw std::domain_error("tangent update: rotation norm outside the principal branch");
  }
}

Pose exp_update(const TangentUpdate& u) {
  u.validate();
  return Pose(Rotation::exp(u.rotation), u.translation);
}

CameraModel::CameraModel(double fx, double fy, double cx, double cy, int width, int height,
                         double depth_scale)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height), depth_scale_(depth_scale) {
  if (!(fx > 0.0) || !(fy > 0.0) || width < 1 || height < 1 || !(depth_scale > 0.0) ||
      !std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw std::invalid_argument("camera: invalid intrinsics");
  }
}

Eigen::Matrix3d CameraModel::K() const {
  Eigen::Matrix3d k;
  k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return k;
}

std::optional<Eigen::Vector2d> CameraModel::project(const Eigen::Vector3d& p) const {
  if (!(p.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(fx_ * p.x() / p.z() + cx_, fy_ * p.y() / p.z() + cy_);
}

Eigen::Vector3d CameraModel::backproject(double u, double v, double z) const {
  if (!(z > 0.0)) throw std::invalid_argument("camera: backproject needs z > 0");
  return {z * (u - cx_) / fx_, z * (v - cy_) / fy_, z};
}

}  // namespace pose6d
