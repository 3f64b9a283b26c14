#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/parallel.hpp"
#include "pose6d/sampler.hpp"

#include <span>
#include <vector>

namespace pose6d {

struct WarpConfig {
  /// Splat footprint is a (2r+1)^2 square around the rounded projection.
  int splat_radius = 1;
  /// Samples within this depth of the per-pixel minimum tie; lowest source
  /// index wins.
  double depth_tie_epsilon = 1e-6;

  void validate() const;
};

/// A colored 3D point already expressed in the destination camera frame.
struct SplatSample {
  Eigen::Vector3d rgb;
  Eigen::Vector3d xyz;
};

/// Z-buffered nearest-sample splatting. Per pixel the winner is the lowest
/// sample index among samples within depth_tie_epsilon of the minimum depth,
/// which makes the result independent of how work is split across threads.
RgbXyzMap splat(std::span<const SplatSample> samples, const CameraModel& cam, const WarpConfig& cfg,
                ThreadPool* pool = nullptr);

/// Moves every valid source sample by dst_pose * inverse(src_pose) and splats
/// it into `dst_cam`. Source samples are taken from their stored XYZ, so the
/// source raster may use a different camera (e.g. an earlier crop).
RgbXyzMap reproject(const RgbXyzMap& src, const Pose& src_pose, const Pose& dst_pose, const CameraModel& dst_cam,
                    const WarpConfig& cfg, ThreadPool* pool = nullptr);

/// Point-based render of a model at `pose`; XYZ in the camera frame.
RgbXyzMap render_pointcloud(const ObjectModel& model, const Pose& pose, const CameraModel& cam,
                            const WarpConfig& cfg, ThreadPool* pool = nullptr);

/// Maps every valid XYZ through inverse(pose) (camera frame -> object frame).
RgbXyzMap to_object_frame(const RgbXyzMap& map, const Pose& pose);

struct RoundtripResidual {
  double mean = 0.0;
  std::size_t survivors = 0;
  double survival_fraction = 0.0;
  std::vector<double> residuals;  ///< per surviving pixel, row-major order
};

/// Warps by delta and back by inverse(delta) and compares surviving pixels
/// with their originals.
RoundtripResidual warp_roundtrip_residual(const RgbXyzMap& src, const Pose& delta, const CameraModel& cam,
                                          const WarpConfig& cfg = {});

}  // namespace pose6d
