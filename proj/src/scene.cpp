#include "pose6d/scene.hpp"

#include "pose6d/io.hpp"
#include "pose6d/models.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pose6d {

namespace {

constexpr double kBackgroundDepth = 1.5;
constexpr double kPlateGap = 0.05;
const Rgb8 kBackgroundColor{96, 96, 96};
const Rgb8 kPlateColor{200, 60, 60};

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    if (q.norm() > 1e-6) return Rotation::from_quaternion(q);
  }
}

bool separated(const PixelBox& a, const PixelBox& b, int margin) {
  return a.u_max + margin < b.u_min || b.u_max + margin < a.u_min || a.v_max + margin < b.v_min ||
         b.v_max + margin < a.v_min;
}

bool inside_frame(const PixelBox& b, const CameraModel& cam, int margin) {
  return b.u_min >= margin && b.v_min >= margin && b.u_max < cam.width() - margin && b.v_max < cam.height() - margin;
}

double quantize_depth(double z, double scale) { return static_cast<double>(std::llround(z / scale)) * scale; }

bool in_plate(const OccluderSpec& o, int u, int v) {
  if (u < o.region.u_min || u > o.region.u_max || v < o.region.v_min || v > o.region.v_max) return false;
  return o.normal.dot(Eigen::Vector2d(u, v) - o.center) >= o.offset;
}

// Chooses a plate direction and offset so that the requested fraction of the
// silhouette lies on the plate side.
OccluderSpec place_occluder(int target, const BinaryMask& amodal, const RgbXyzMap& render, const SceneSpec& spec,
                            std::mt19937_64& rng) {
  const PixelBox box = tight_bbox(amodal);
  const int grow = spec.margin / 2;
  OccluderSpec o;
  o.target = target;
  o.region = {std::max(0, box.u_min - grow), std::max(0, box.v_min - grow),
              std::min(amodal.width - 1, box.u_max + grow), std::min(amodal.height - 1, box.v_max + grow)};
  o.center = box.center();
  double z_near = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < render.size(); ++i)
    if (render.is_valid(i)) z_near = std::min(z_near, render.xyz[i].z());
  o.depth = z_near - kPlateGap;

  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> proj;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double a = angle(rng);
    o.normal = Eigen::Vector2d(std::cos(a), std::sin(a));
    proj.clear();
    for (int v = 0; v < amodal.height; ++v)
      for (int u = 0; u < amodal.width; ++u)
        if (amodal.at(u, v)) proj.push_back(o.normal.dot(Eigen::Vector2d(u, v) - o.center));
    std::sort(proj.begin(), proj.end(), std::greater<>());
    const auto want = static_cast<std::size_t>(std::lround(spec.occlusion_fraction * proj.size()));
    if (want == 0) continue;
    o.offset = proj[want - 1];
    const auto covered = static_cast<std::size_t>(std::count_if(proj.begin(), proj.end(), [&](double p) { return p >= o.offset; }));
    const double frac = static_cast<double>(covered) / proj.size();
    if (std::abs(frac - spec.occlusion_fraction) <= spec.occlusion_tolerance) return o;
  }
  throw std::invalid_argument("scene: cannot reach the requested occlusion fraction");
}

}  // namespace

CameraModel default_camera() { return CameraModel(572.4, 573.6, 325.3, 242.0, 640, 480, 0.001); }

void SceneSpec::validate() const {
  if (object_ids.empty()) throw std::invalid_argument("scene: no objects");
  for (int id : object_ids) library_model(id);
  if (!(z_min > 0.0) || !(z_max >= z_min)) throw std::invalid_argument("scene: invalid depth range");
  if (!(occlusion_fraction >= 0.0 && occlusion_fraction < 0.95)) throw std::invalid_argument("scene: occlusion fraction outside [0, 0.95)");
  if (!(occlusion_tolerance > 0.0)) throw std::invalid_argument("scene: occlusion tolerance must be > 0");
  if (margin < 0 || max_attempts < 1 || patch_stride < 1) throw std::invalid_argument("scene: invalid placement settings");
  warp.validate();
}

std::array<float, 4> query_oracle_feature(const Eigen::Vector3d& p) {
  return {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()), 1.0f};
}

std::array<float, 4> template_oracle_feature(const Eigen::Vector3d& p, double diameter) {
  const double kappa = 2.0 * diameter * diameter;
  return {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()),
          static_cast<float>(kappa - 0.5 * p.squaredNorm())};
}

ObservationFrame SyntheticScene::frame(std::size_t k, bool with_occlusion) const {
  const SceneObject& o = objects.at(k);
  ObservationFrame f{rgb, depth, o.visible, std::nullopt, o.features, camera, o.model.id()};
  if (with_occlusion) f.occlusion = o.occlusion;
  return f;
}

SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  const CameraModel& cam = spec.camera;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticScene scene;
  scene.seed = seed;
  scene.camera = cam;
  std::vector<RgbXyzMap> renders;
  std::vector<PixelBox> boxes;

  for (int id : spec.object_ids) {
    SceneObject obj;
    obj.model = library_model(id);
    const double radius = 0.5 * obj.model.diameter();
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      const Rotation r = random_rotation(rng);
      const double z = spec.z_min + (spec.z_max - spec.z_min) * unit(rng);
      const double r_px = cam.fx() * radius / (z - radius);
      const double lo_u = spec.margin + r_px, hi_u = cam.width() - 1 - spec.margin - r_px;
      const double lo_v = spec.margin + r_px, hi_v = cam.height() - 1 - spec.margin - r_px;
      const double u = lo_u + (hi_u - lo_u) * unit(rng);
      const double v = lo_v + (hi_v - lo_v) * unit(rng);
      if (hi_u <= lo_u || hi_v <= lo_v) continue;
      const PixelBox guess{static_cast<int>(u - r_px), static_cast<int>(v - r_px), static_cast<int>(u + r_px) + 1,
                           static_cast<int>(v + r_px) + 1};
      if (!std::all_of(boxes.begin(), boxes.end(), [&](const PixelBox& b) { return separated(b, guess, spec.margin); }))
        continue;
      const Pose gt(r, cam.backproject(u, v, z));
      RgbXyzMap render = render_pointcloud(obj.model, gt, cam, spec.warp);
      BinaryMask amodal = render.valid_mask();
      const PixelBox box = tight_bbox(amodal);
      if (box.empty() || !inside_frame(box, cam, spec.margin)) continue;
      if (!std::all_of(boxes.begin(), boxes.end(), [&](const PixelBox& b) { return separated(b, box, spec.margin); }))
        continue;
      obj.gt = gt;
      obj.amodal = std::move(amodal);
      renders.push_back(std::move(render));
      boxes.push_back(box);
      placed = true;
    }
    if (!placed) throw std::invalid_argument("scene: objects cannot fit in frame");
    scene.objects.push_back(std::move(obj));
  }

  const std::size_t n = scene.objects.size();
  if (spec.occlusion_fraction > 0.0) {
    for (std::size_t k = 0; k < n; ++k)
      scene.objects[k].occluder = place_occluder(static_cast<int>(k), scene.objects[k].amodal, renders[k], spec, rng);
  }

  // Composite: nearest of background, object renders and plates.
  const int W = cam.width(), H = cam.height();
  scene.rgb = RgbImage(W, H, kBackgroundColor);
  scene.depth = DepthMap(W, H, 0.0);
  for (auto& o : scene.objects) o.visible = BinaryMask(W, H, 0);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * W + u;
      double z = kBackgroundDepth;
      int winner = -1;  // -1 background, -2 plate
      Rgb8 color = kBackgroundColor;
      for (std::size_t k = 0; k < n; ++k) {
        if (renders[k].is_valid(i) && renders[k].xyz[i].z() < z) {
          z = renders[k].xyz[i].z();
          winner = static_cast<int>(k);
          const Eigen::Vector3d& c = renders[k].rgb[i];
          color = {static_cast<std::uint8_t>(std::lround(255.0 * c.x())), static_cast<std::uint8_t>(std::lround(255.0 * c.y())),
                   static_cast<std::uint8_t>(std::lround(255.0 * c.z()))};
        }
        const OccluderSpec& oc = scene.objects[k].occluder;
        if (oc.target >= 0 && in_plate(oc, u, v) && oc.depth < z) {
          z = oc.depth;
          winner = -2;
          color = kPlateColor;
        }
      }
      scene.depth.data[i] = quantize_depth(z, cam.depth_scale());
      scene.rgb.data[i] = color;
      if (winner >= 0) scene.objects[static_cast<std::size_t>(winner)].visible.data[i] = 1;
    }
  }

  const PatchGrid grid = PatchGrid::covering(W, H, spec.patch_stride);
  for (std::size_t k = 0; k < n; ++k) {
    SceneObject& o = scene.objects[k];
    o.occlusion = BinaryMask(W, H, 0);
    for (std::size_t i = 0; i < o.amodal.size(); ++i) o.occlusion.data[i] = o.amodal.data[i] && !o.visible.data[i];
    o.occluded_fraction = static_cast<double>(count_true(o.occlusion)) / static_cast<double>(count_true(o.amodal));
    o.features = FeatureMap(grid, 4);
    const Pose to_obj = inverse(o.gt);
    for (int p = 0; p < grid.size(); ++p) {
      const Eigen::Vector2i c = grid.center_pixel(p);
      if (c.x() >= W || c.y() >= H || !o.visible.at(c.x(), c.y())) continue;
      const Eigen::Vector3d& x = renders[k].xyz[renders[k].index(c.x(), c.y())];
      const auto f = query_oracle_feature(to_obj.rotation() * x + to_obj.translation());
      std::copy(f.begin(), f.end(), o.features.at(p));
    }
  }
  return scene;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json pose_json(const Pose& p) {
  const Eigen::Matrix3d r = p.rotation().matrix();
  const Eigen::Quaterniond& q = p.rotation().quaternion();
  std::vector<double> rv, tv;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) rv.push_back(r(i, k));
  for (int i = 0; i < 3; ++i) tv.push_back(1000.0 * p.translation()[i]);
  return {{"cam_R_m2c", rv},
          {"cam_t_m2c", tv},
          {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}},
          {"translation_m", {p.translation().x(), p.translation().y(), p.translation().z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  const auto q = j.at("quaternion_wxyz").get<std::vector<double>>();
  const auto t = j.at("translation_m").get<std::vector<double>>();
  if (q.size() != 4 || t.size() != 3) throw std::invalid_argument("pose arrays have the wrong length");
  return Pose(Rotation::from_quaternion(q[0], q[1], q[2], q[3]), Eigen::Vector3d(t[0], t[1], t[2]));
}

}  // namespace

void save_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const CameraModel& cam = scene.camera;
  write_png_rgb(dir / "rgb.png", scene.rgb);
  write_png_depth(dir / "depth.png", scene.depth, cam.depth_scale());
  write_camera_json(dir / "camera.json", cam);
  nlohmann::ordered_json gt;
  gt["seed"] = scene.seed;
  gt["objects"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const SceneObject& o = scene.objects[k];
    const std::string s = std::to_string(k);
    write_png_mask(dir / ("mask_visib_" + s + ".png"), o.visible);
    write_png_mask(dir / ("mask_amodal_" + s + ".png"), o.amodal);
    write_png_mask(dir / ("mask_occ_" + s + ".png"), o.occlusion);
    write_dten(dir / ("features_" + s + ".dten"), to_tensor(o.features));
    nlohmann::ordered_json e{{"obj_id", o.model.id()}, {"occluded_fraction", o.occluded_fraction}};
    e.update(pose_json(o.gt));
    if (o.occluder.target >= 0) {
      e["occluder"] = {{"normal", {o.occluder.normal.x(), o.occluder.normal.y()}},
                       {"center", {o.occluder.center.x(), o.occluder.center.y()}},
                       {"offset", o.occluder.offset},
                       {"depth", o.occluder.depth},
                       {"region", {o.occluder.region.u_min, o.occluder.region.v_min, o.occluder.region.u_max,
                                   o.occluder.region.v_max}}};
    }
    gt["objects"].push_back(e);
  }
  write_text_file(dir / "scene_gt.json", gt.dump(2) + "\n");
}

SyntheticScene load_scene(const std::filesystem::path& dir, int patch_stride) {
  SyntheticScene scene;
  scene.camera = read_camera_json(dir / "camera.json");
  scene.rgb = read_png_rgb(dir / "rgb.png");
  scene.depth = read_png_depth(dir / "depth.png", scene.camera.depth_scale());
  if (!scene.rgb.same_shape(scene.camera.width(), scene.camera.height()) ||
      !scene.depth.same_shape(scene.camera.width(), scene.camera.height()))
    throw IoError(IoError::Kind::DimensionMismatch, dir.string(), "rasters do not match camera.json");
  const std::string gt_path = (dir / "scene_gt.json").string();
  nlohmann::json gt;
  try {
    gt = nlohmann::json::parse(read_text_file(dir / "scene_gt.json"));
    scene.seed = gt.at("seed").get<std::uint64_t>();
    const auto& objs = gt.at("objects");
    for (std::size_t k = 0; k < objs.size(); ++k) {
      SceneObject o;
      o.model = library_model(objs[k].at("obj_id").get<int>());
      o.gt = pose_from_json(objs[k]);
      o.occluded_fraction = objs[k].at("occluded_fraction").get<double>();
      scene.objects.push_back(std::move(o));
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoError::Kind::Malformed, gt_path, e.what(), static_cast<std::int64_t>(e.byte));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::Malformed, gt_path, e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(IoError::Kind::Malformed, gt_path, e.what());
  }
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    SceneObject& o = scene.objects[k];
    const std::string s = std::to_string(k);
    o.visible = read_png_mask(dir / ("mask_visib_" + s + ".png"));
    o.amodal = read_png_mask(dir / ("mask_amodal_" + s + ".png"));
    o.occlusion = read_png_mask(dir / ("mask_occ_" + s + ".png"));
    const auto fpath = dir / ("features_" + s + ".dten");
    o.features = features_from_tensor(read_dten(fpath), patch_stride, fpath.string());
    if (!o.features.grid.matches_image(scene.camera.width(), scene.camera.height()))
      throw IoError(IoError::Kind::DimensionMismatch, fpath.string(), "feature grid does not match the image");
  }
  return scene;
}

}  // namespace pose6d
