#pragma once

// Independent reference implementations used only by tests. They avoid the
// library's own code paths (no Eigen geometry helpers, no grids).

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline Mat3 quat_to_matrix(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n, x /= n, y /= n, z /= n;
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

/// Rodrigues: I + sin(t) K + (1 - cos(t)) K^2.
inline Mat3 rodrigues(const Vec3& w) {
  const double t = w.norm();
  if (t == 0.0) return Mat3::Identity();
  const Vec3 k = w / t;
  Mat3 kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Mat3::Identity() + std::sin(t) * kx + (1 - std::cos(t)) * kx * kx;
}

/// Angle of a rotation matrix from its skew part and trace.
inline double matrix_angle(const Mat3& r) {
  const Vec3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * s.norm(), 0.5 * (r.trace() - 1.0));
}

inline Eigen::Matrix4d homogeneous(const Mat3& r, const Vec3& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

inline Mat3 rot_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Vec3 random_axis_angle(std::mt19937_64& rng, double max_angle) {
  std::uniform_real_distribution<double> u(0.0, max_angle);
  return random_unit(rng) * u(rng);
}

/// Exhaustive row-wise argmax with strict > against zero; ties keep the
/// earliest column.
struct Match {
  int i, j;
  double w;
};
inline std::vector<Match> argmax_rows(const std::vector<std::vector<double>>& s) {
  std::vector<Match> out;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    int best = -1;
    double bw = 0.0;
    for (int j = 0; j < static_cast<int>(s[i].size()); ++j) {
      if (s[i][j] > bw) {
        bw = s[i][j];
        best = j;
      }
    }
    if (best >= 0) out.push_back({i, best, bw});
  }
  return out;
}

/// Axis-aligned cube [-h, h]^3 ray cast from the camera origin through
/// direction d (camera frame), cube posed by (r, t). Returns the entry point
/// in the object frame.
inline std::optional<Vec3> ray_cast_cube(const Mat3& r, const Vec3& t, double h, const Vec3& d) {
  const Mat3 rt = r.transpose();
  const Vec3 o = -(rt * t);  // camera origin in the object frame
  const Vec3 dir = rt * d;
  double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (o[a] < -h || o[a] > h) return std::nullopt;
      continue;
    }
    double ta = (-h - o[a]) / dir[a], tb = (h - o[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t0 <= 0.0) return std::nullopt;
  return o + t0 * dir;
}

/// Brute-force nearest distance from q to a point set.
inline double nearest_distance(const std::vector<Vec3>& pts, const Vec3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, (p - q).norm());
  return best;
}

inline double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace oracle
