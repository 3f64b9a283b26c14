#include "pose6d/sampler.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace pose6d {

void SamplerConfig::validate() const {
  if (subdivision_level < 0 || subdivision_level > 8) {
    throw std::invalid_argument("sampler: subdivision_level must be in [0, 8]");
  }
  if (!(in_plane_step > 0.0) || in_plane_step > 2.0 * std::numbers::pi + 1e-9) {
    throw std::invalid_argument("sampler: in_plane_step must be in (0, 2pi]");
  }
  if (!(depth_alpha > 0.0)) throw std::invalid_argument("sampler: depth_alpha must be positive");
  if (visibility_sigma && (std::isnan(*visibility_sigma) || *visibility_sigma == std::numeric_limits<double>::infinity())) {
    throw std::invalid_argument("sampler: visibility_sigma must be finite or -inf");
  }
}

double point_set_diameter(const std::vector<Eigen::Vector3d>& points) {
  if (points.size() < 2) return 0.0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  std::vector<std::pair<double, std::size_t>> by_radius(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) by_radius[i] = {(points[i] - centroid).norm(), i};
  std::sort(by_radius.begin(), by_radius.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  // |p_i - p_j| <= r_i + r_j bounds every remaining pair once the sum drops.
  double best = 0.0;
  for (std::size_t a = 0; a < by_radius.size(); ++a) {
    const double ra = by_radius[a].first;
    if (2.0 * ra <= best) break;
    const Eigen::Vector3d& pa = points[by_radius[a].second];
    for (std::size_t b = a + 1; b < by_radius.size(); ++b) {
      if (ra + by_radius[b].first <= best) break;
      best = std::max(best, (pa - points[by_radius[b].second]).norm());
    }
  }
  return best;
}

ObjectModel ObjectModel::create(int id, std::vector<Eigen::Vector3d> points,
                                std::vector<std::array<std::uint8_t, 3>> colors) {
  if (points.size() < 4) throw std::invalid_argument("object model: needs at least 4 points");
  if (colors.size() != points.size()) throw std::invalid_argument("object model: color count mismatch");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) {
    if (!p.allFinite()) throw std::invalid_argument("object model: non-finite point");
    mean += p;
  }
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvalues();
  if (!(ev(0) > 1e-12 * std::max(ev(2), 1e-300))) {
    throw std::invalid_argument("object model: points are coplanar");
  }
  ObjectModel m;
  m.id_ = id;
  m.points_ = std::move(points);
  m.colors_ = std::move(colors);
  m.diameter_ = point_set_diameter(m.points_);
  return m;
}

std::vector<Eigen::Vector3d> icosphere_vertices(int level) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-phi, phi}) {
      v.emplace_back(0.0, a, b);
      v.emplace_back(a, b, 0.0);
      v.emplace_back(b, 0.0, a);
    }
  }
  // Faces of the base icosahedron: vertex triples at mutual edge length 2.
  std::vector<std::array<std::size_t, 3>> faces;
  const auto is_edge = [&](std::size_t i, std::size_t j) { return std::abs((v[i] - v[j]).norm() - 2.0) < 1e-9; };
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      for (std::size_t k = j + 1; k < v.size(); ++k)
        if (is_edge(i, j) && is_edge(j, k) && is_edge(i, k)) faces.push_back({i, j, k});
  for (auto& p : v) p.normalize();

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoint;
    const auto mid = [&](std::size_t a, std::size_t b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      midpoint.emplace(key, v.size() - 1);
      return v.size() - 1;
    };
    std::vector<std::array<std::size_t, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const std::size_t ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  const auto quantized = [](const Eigen::Vector3d& p) {
    return std::make_tuple(std::llround(p.x() * 1e9), std::llround(p.y() * 1e9), std::llround(p.z() * 1e9));
  };
  std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) { return quantized(a) < quantized(b); });
  return v;
}

Rotation look_at_rotation(const Eigen::Vector3d& viewpoint) {
  const Eigen::Vector3d z = -viewpoint.normalized();
  Eigen::Vector3d up = Eigen::Vector3d::UnitY();
  if (std::abs(z.dot(up)) > 1.0 - 1e-9) up = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d y = (up - up.dot(z) * z).normalized();
  const Eigen::Vector3d x = y.cross(z);
  // Columns are the camera axes in the object frame (camera-to-object).
  Eigen::Matrix3d cam_to_obj;
  cam_to_obj.col(0) = x;
  cam_to_obj.col(1) = y;
  cam_to_obj.col(2) = z;
  return Rotation::from_matrix(cam_to_obj.transpose());
}

std::vector<Rotation> sample_viewpoints(const SamplerConfig& cfg) {
  cfg.validate();
  std::vector<Rotation> out;
  for (const auto& v : icosphere_vertices(cfg.subdivision_level)) out.push_back(look_at_rotation(v));
  return out;
}

std::vector<Rotation> filter_visible(const std::vector<Rotation>& views, const ObjectModel& model,
                                     const SamplerConfig& cfg) {
  if (!cfg.visibility_sigma) return views;
  const double d = model.diameter();
  std::vector<Rotation> out;
  for (const auto& r : views) {
    const Eigen::Vector3d center = -cfg.depth_alpha * d * (r.inverse() * Eigen::Vector3d::UnitZ());
    if (center.z() >= *cfg.visibility_sigma * d) out.push_back(r);
  }
  return out;
}

std::vector<Rotation> augment_in_plane(const std::vector<Rotation>& views, const SamplerConfig& cfg) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double count = std::round(two_pi / cfg.in_plane_step);
  if (!(cfg.in_plane_step > 0.0) || count < 1.0 || std::abs(count * cfg.in_plane_step - two_pi) > 1e-9) {
    throw std::invalid_argument("sampler: in-plane step does not divide 2*pi");
  }
  const int n = static_cast<int>(count);
  std::vector<Rotation> out;
  out.reserve(views.size() * n);
  for (const auto& r : views) {
    for (int k = 0; k < n; ++k) out.push_back(Rotation::about_z(k * cfg.in_plane_step) * r);
  }
  return out;
}

Pose template_pose(const Rotation& view, const ObjectModel& model, const SamplerConfig& cfg) {
  return Pose(view, Eigen::Vector3d(0.0, 0.0, cfg.depth_alpha * model.diameter()));
}

std::vector<Rotation> rotation_hypotheses(const ObjectModel& model, const SamplerConfig& cfg) {
  return augment_in_plane(filter_visible(sample_viewpoints(cfg), model, cfg), cfg);
}

}  // namespace pose6d
