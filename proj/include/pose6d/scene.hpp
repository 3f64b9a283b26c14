#pragma once

#include "pose6d/frame.hpp"
#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/matcher.hpp"
#include "pose6d/sampler.hpp"
#include "pose6d/warp.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pose6d {

/// 640 x 480 pinhole camera with 1 mm depth units.
CameraModel default_camera();

struct SceneSpec {
  CameraModel camera = default_camera();
  /// Library ids of the objects to place, one instance each.
  std::vector<int> object_ids{1, 2, 3, 4, 5};
  double z_min = 0.6;
  double z_max = 0.9;
  /// Target occluded fraction of every object silhouette; 0 disables occluders.
  double occlusion_fraction = 0.0;
  double occlusion_tolerance = 0.05;
  /// Minimum pixel gap between amodal boxes and to the image border.
  int margin = 12;
  int max_attempts = 2000;
  int patch_stride = 5;
  WarpConfig warp;

  void validate() const;
};

/// Fronto-parallel plate in front of one object: pixels p of `region` with
/// normal . (p - center) >= offset.
struct OccluderSpec {
  int target = -1;  ///< object index, -1 = none
  Eigen::Vector2d normal = Eigen::Vector2d::UnitX();
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double offset = 0.0;
  double depth = 0.0;
  PixelBox region;
};

struct SceneObject {
  ObjectModel model;
  Pose gt;
  BinaryMask amodal;
  BinaryMask visible;
  BinaryMask occlusion;
  double occluded_fraction = 0.0;
  OccluderSpec occluder;
  /// Ground-truth object-coordinate features on the query patch grid.
  FeatureMap features;
};

struct SyntheticScene {
  std::uint64_t seed = 0;
  CameraModel camera = default_camera();
  RgbImage rgb;
  DepthMap depth;
  std::vector<SceneObject> objects;

  /// One frame per object; the occlusion mask is attached when requested.
  ObservationFrame frame(std::size_t k, bool with_occlusion = true) const;
};

/// Query oracle feature (p, 1) of a ground-truth object-frame point.
std::array<float, 4> query_oracle_feature(const Eigen::Vector3d& p_obj);
/// Template oracle feature (p, kappa - |p|^2 / 2), kappa = 2 D^2.
std::array<float, 4> template_oracle_feature(const Eigen::Vector3d& p_obj, double diameter);

/// Places library objects at seeded random poses with disjoint silhouettes,
/// composites them with a z-buffer, and optionally places one plate per
/// object covering occlusion_fraction of its silhouette. Throws
/// std::invalid_argument when the objects cannot be placed.
SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed);

/// Writes rgb.png, depth.png, camera.json, scene_gt.json and per object k
/// mask_visib_k.png, mask_amodal_k.png, mask_occ_k.png, features_k.dten.
void save_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

/// Inverse of save_scene; models are rebuilt from the library ids.
SyntheticScene load_scene(const std::filesystem::path& dir, int patch_stride = 5);

}  // namespace pose6d
