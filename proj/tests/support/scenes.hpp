#pragma once

#include "pose6d/frame.hpp"
#include "pose6d/warp.hpp"

#include <cmath>

namespace testscenes {

/// Single-object frame rendered with the point renderer; the visible mask is
/// the rendered silhouette.
inline pose6d::ObservationFrame render_frame(const pose6d::ObjectModel& model, const pose6d::Pose& gt,
                                             const pose6d::CameraModel& cam) {
  const pose6d::RgbXyzMap img = pose6d::render_pointcloud(model, gt, cam, pose6d::WarpConfig{});
  pose6d::ObservationFrame f;
  f.camera = cam;
  f.object_id = model.id();
  f.rgb = pose6d::RgbImage(cam.width(), cam.height());
  f.depth = pose6d::DepthMap(cam.width(), cam.height());
  f.visible = pose6d::BinaryMask(cam.width(), cam.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!img.is_valid(i)) continue;
    for (int c = 0; c < 3; ++c) f.rgb.data[i][c] = static_cast<std::uint8_t>(std::lround(255.0 * img.rgb[i][c]));
    f.depth.data[i] = img.xyz[i].z();
    f.visible.data[i] = 1;
  }
  return f;
}

inline double add(const pose6d::ObjectModel& m, const pose6d::Pose& a, const pose6d::Pose& b) {
  double s = 0;
  for (const auto& x : m.points()) s += ((a * x) - (b * x)).norm();
  return s / static_cast<double>(m.size());
}

}  // namespace testscenes
