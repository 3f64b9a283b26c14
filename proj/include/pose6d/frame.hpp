#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/matcher.hpp"

#include <optional>

namespace pose6d {

/// Per-object query input. All rasters share the camera's width x height.
struct ObservationFrame {
  RgbImage rgb;
  DepthMap depth;  ///< meters, 0 = invalid
  BinaryMask visible;
  std::optional<BinaryMask> occlusion;
  std::optional<FeatureMap> features;
  CameraModel camera;
  int object_id = 0;

  /// Throws std::invalid_argument when raster shapes disagree with the camera.
  void validate() const;
};

}  // namespace pose6d
