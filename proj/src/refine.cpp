#include "pose6d/refine.hpp"

#include "pose6d/spatial_grid.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace pose6d {

HypothesisBatch HypothesisBatch::make(int objects, int per_object) {
  if (objects < 0 || per_object < 0) throw std::invalid_argument("batch: negative size");
  HypothesisBatch b;
  b.objects = objects;
  b.per_object = per_object;
  b.entries.resize(static_cast<std::size_t>(objects) * per_object);
  for (int n = 0; n < objects; ++n) {
    for (int k = 0; k < per_object; ++k) {
      b.at(n, k).object = n;
      b.at(n, k).index = k;
    }
  }
  return b;
}

void HypothesisBatch::validate() const {
  if (objects < 0 || per_object < 0) throw std::invalid_argument("batch: negative size");
  if (entries.size() != static_cast<std::size_t>(objects) * per_object)
    throw std::invalid_argument("batch: entry count is not objects * per_object");
  for (int n = 0; n < objects; ++n) {
    for (int k = 0; k < per_object; ++k) {
      const auto& h = at(n, k);
      if (h.object != n || h.index != k) throw std::invalid_argument("batch: entries are not object-major");
      if (!std::isfinite(h.score)) throw std::invalid_argument("batch: non-finite score");
    }
  }
}

void IncrementPrediction::validate() const {
  update.validate();
  if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0)
    throw std::domain_error("increment: confidence outside [0, 1]");
}

Pose apply_increment(const Pose& pose, const IncrementPrediction& inc) {
  inc.validate();
  return Pose(Rotation::exp(inc.update.rotation) * pose.rotation(), pose.translation() + inc.update.translation);
}

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d principal_log(const Rotation& r) {
  Eigen::Vector3d w = r.log();
  const double n = w.norm();
  const double cap = kPi - 1e-9;
  if (n > cap) w *= cap / n;
  return w;
}

Pose weighted_kabsch(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst,
                     std::span<const double> w, const std::vector<std::size_t>& use) {
  double total = 0.0;
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i : use) {
    total += w[i];
    cs += w[i] * src[i];
    cd += w[i] * dst[i];
  }
  if (!(total > 0.0)) throw InsufficientOverlap(0);
  cs /= total;
  cd /= total;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i : use) h += w[i] * (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  const Rotation rot = Rotation::from_matrix(r);
  return Pose(rot, cd - rot.matrix() * cs);
}

double lower_median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<double> residuals_of(const Pose& t, std::span<const Eigen::Vector3d> src,
                                 std::span<const Eigen::Vector3d> dst) {
  std::vector<double> r(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) r[i] = (t * src[i] - dst[i]).norm();
  return r;
}

std::vector<std::size_t> inlier_set(const std::vector<double>& r, double floor) {
  const double med = lower_median(r);
  std::vector<double> dev(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) dev[i] = std::abs(r[i] - med);
  const double sigma = std::max(1.4826 * lower_median(dev), floor);
  std::vector<std::size_t> in;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= med + 3.0 * sigma) in.push_back(i);
  }
  return in;
}

IncrementPrediction from_fit(const RigidFit& fit, std::size_t candidates) {
  IncrementPrediction out;
  out.update.rotation = principal_log(fit.transform.rotation());
  out.update.translation = fit.transform.translation();
  out.confidence = candidates ? static_cast<double>(fit.inliers) / static_cast<double>(candidates) : 0.0;
  out.confidence = std::clamp(out.confidence, 0.0, 1.0);
  return out;
}

}  // namespace

RigidFit fit_rigid(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst,
                   std::span<const double> weights, const AlignmentConfig& cfg) {
  if (src.size() != dst.size() || src.size() != weights.size())
    throw std::invalid_argument("fit_rigid: size mismatch");
  if (cfg.robust_passes < 0 || !(cfg.residual_floor > 0.0))
    throw std::invalid_argument("fit_rigid: invalid config");
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("fit_rigid: weights must be finite and >= 0");
  }
  if (src.size() < 3) throw InsufficientOverlap(src.size());

  std::vector<std::size_t> use(src.size());
  for (std::size_t i = 0; i < use.size(); ++i) use[i] = i;
  Pose t = weighted_kabsch(src, dst, weights, use);
  for (int pass = 0; pass < cfg.robust_passes; ++pass) {
    auto next = inlier_set(residuals_of(t, src, dst), cfg.residual_floor);
    if (next.size() < 3 || next == use) break;
    use = std::move(next);
    t = weighted_kabsch(src, dst, weights, use);
  }

  RigidFit fit;
  fit.transform = t;
  fit.pairs = src.size();
  fit.inliers = inlier_set(residuals_of(t, src, dst), cfg.residual_floor).size();
  return fit;
}

IncrementPrediction geometric_increment(const RgbXyzMap& query, const RgbXyzMap& reference,
                                        const AlignmentConfig& cfg) {
  if (query.width != reference.width || query.height != reference.height)
    throw std::invalid_argument("geometric_increment: map shapes differ");
  std::vector<Eigen::Vector3d> src, dst;
  for (std::size_t i = 0; i < query.size(); ++i) {
    if (!query.is_valid(i) || !reference.is_valid(i)) continue;
    src.push_back(reference.xyz[i]);
    dst.push_back(query.xyz[i]);
  }
  if (src.size() < 3) throw InsufficientOverlap(src.size());
  const std::vector<double> w(src.size(), 1.0);
  return from_fit(fit_rigid(src, dst, w, cfg), src.size());
}

IncrementPrediction appearance_increment(const RgbXyzMap& query, const RgbXyzMap& reference,
                                         const AlignmentConfig& cfg) {
  if (cfg.query_stride < 1 || !(cfg.max_color_distance > 0.0))
    throw std::invalid_argument("appearance_increment: invalid config");
  std::vector<Eigen::Vector3d> ref_rgb, ref_xyz;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (!reference.is_valid(i)) continue;
    ref_rgb.push_back(reference.rgb[i]);
    ref_xyz.push_back(reference.xyz[i]);
  }
  const NearestNeighborGrid grid(ref_rgb, cfg.max_color_distance);
  std::vector<Eigen::Vector3d> src, dst;
  std::size_t candidates = 0;
  for (int v = 0; v < query.height; v += cfg.query_stride) {
    for (int u = 0; u < query.width; u += cfg.query_stride) {
      const std::size_t i = query.index(u, v);
      if (!query.is_valid(i)) continue;
      ++candidates;
      const auto hit = grid.nearest(query.rgb[i], cfg.max_color_distance);
      if (!hit) continue;
      src.push_back(ref_xyz[hit->index]);
      dst.push_back(query.xyz[i]);
    }
  }
  if (src.size() < 3) throw InsufficientOverlap(src.size());
  const std::vector<double> w(src.size(), 1.0);
  return from_fit(fit_rigid(src, dst, w, cfg), candidates);
}

IncrementPrediction GeometricPredictor::predict(const RgbXyzMap& query, const RgbXyzMap& reference,
                                                const Pose& current) const {
  IncrementPrediction raw = association_ == Association::Pixel ? geometric_increment(query, reference, cfg_)
                                                               : appearance_increment(query, reference, cfg_);
  const Rotation r0 = Rotation::exp(raw.update.rotation);
  const Eigen::Vector3d& t = current.translation();
  raw.update.translation = r0 * t + raw.update.translation - t;
  return raw;
}

std::string GeometricPredictor::name() const {
  return association_ == Association::Pixel ? "geometric-pixel" : "geometric-appearance";
}

std::unique_ptr<IncrementPredictor> make_predictor(const std::string& name, const AlignmentConfig& cfg) {
  if (name == "zero") return std::make_unique<ZeroPredictor>();
  if (name == "geometric-pixel") return std::make_unique<GeometricPredictor>(Association::Pixel, cfg);
  if (name == "geometric-appearance" || name == "geometric")
    return std::make_unique<GeometricPredictor>(Association::Appearance, cfg);
  throw std::invalid_argument("unknown predictor: " + name);
}

// ---------------------------------------------------------------------------

void AmprConfig::validate() const {
  if (!(expansion >= 1.0) || !std::isfinite(expansion)) throw std::invalid_argument("ampr: expansion must be >= 1");
  if (crop_size < 8) throw std::invalid_argument("ampr: crop_size must be >= 8");
  if (occlusion_dilation < 0) throw std::invalid_argument("ampr: occlusion_dilation must be >= 0");
}

RoiBox roi_from_mask(const BinaryMask& mask, double expansion) {
  const PixelBox px = tight_bbox(mask);
  if (px.empty()) throw std::invalid_argument("roi_from_mask: empty mask");
  const Eigen::Vector2d c = px.center();
  const double side = expansion * std::max(px.u_max - px.u_min + 1, px.v_max - px.v_min + 1);
  RoiBox b{c.x() - 0.5 * side, c.y() - 0.5 * side, c.x() + 0.5 * side, c.y() + 0.5 * side};
  b.u_min = std::max(b.u_min, -0.5);
  b.v_min = std::max(b.v_min, -0.5);
  b.u_max = std::min(b.u_max, mask.width - 0.5);
  b.v_max = std::min(b.v_max, mask.height - 0.5);
  return b;
}

CameraModel crop_camera(const CameraModel& cam, const RoiBox& box, int size) {
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) throw std::invalid_argument("crop_camera: empty box");
  const double sx = size / box.width(), sy = size / box.height();
  return CameraModel(sx * cam.fx(), sy * cam.fy(), sx * (cam.cx() - box.u_min) - 0.5,
                     sy * (cam.cy() - box.v_min) - 0.5, size, size, cam.depth_scale());
}

RgbXyzMap crop_query(const ObservationFrame& frame, const RoiBox& box, const CameraModel& crop_cam) {
  const CameraModel& cam = frame.camera;
  const int size_u = crop_cam.width(), size_v = crop_cam.height();
  const double sx = size_u / box.width(), sy = size_v / box.height();
  RgbXyzMap out(size_u, size_v);
  for (int j = 0; j < size_v; ++j) {
    const int sv = static_cast<int>(std::floor(box.v_min + (j + 0.5) / sy + 0.5));
    for (int i = 0; i < size_u; ++i) {
      const int su = static_cast<int>(std::floor(box.u_min + (i + 0.5) / sx + 0.5));
      if (!cam.contains(su, sv) || !frame.visible.at(su, sv)) continue;
      const double z = frame.depth.at(su, sv);
      if (!(z > 0.0)) continue;
      const Rgb8& c = frame.rgb.at(su, sv);
      out.set(out.index(i, j), Eigen::Vector3d(c[0], c[1], c[2]) / 255.0, cam.backproject(su, sv, z));
    }
  }
  return out;
}

AmodalState AmodalState::make(const BinaryMask& visible, const std::optional<BinaryMask>& occlusion,
                              const AmprConfig& cfg) {
  cfg.validate();
  AmodalState s;
  s.visible = visible;
  s.crop_size = cfg.crop_size;
  if (occlusion) {
    if (!occlusion->same_shape(visible.width, visible.height))
      throw std::invalid_argument("amodal: mask shapes differ");
    s.occlusion = *occlusion;
  } else if (cfg.occlusion_dilation > 0) {
    s.occlusion = dilate(visible, cfg.occlusion_dilation);
    for (std::size_t i = 0; i < s.occlusion.size(); ++i) {
      if (visible.data[i]) s.occlusion.data[i] = 0;
    }
  } else {
    s.occlusion = BinaryMask(visible.width, visible.height);
  }
  s.amodal = mask_union(s.visible, s.occlusion);
  if (count_true(s.amodal) == 0) throw std::invalid_argument("amodal: empty mask");
  s.box = roi_from_mask(cfg.use_amodal ? s.amodal : s.visible, cfg.expansion);
  return s;
}

AmprResult ampr_realign(AmodalState& state, const ObservationFrame& frame, const AmprConfig& cfg) {
  cfg.validate();
  state.amodal = mask_union(state.visible, state.occlusion);
  state.crop_size = cfg.crop_size;
  state.box = roi_from_mask(cfg.use_amodal ? state.amodal : state.visible, cfg.expansion);
  AmprResult out{state.box, crop_camera(frame.camera, state.box, cfg.crop_size), {}};
  out.query = crop_query(frame, out.box, out.camera);
  return out;
}

// ---------------------------------------------------------------------------

void RefineConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("refine: iterations must be >= 1");
  warp.validate();
  ampr.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct HypState {
  RgbXyzMap ref0;
  Pose pose0;
  RgbXyzMap ref;
};

RgbXyzMap warp_step(int iter, HypState& h, const Pose& pose, const ObjectModel& model, const CameraModel& crop_cam,
                    const WarpConfig& cfg, ThreadPool* pool) {
  if (iter == 0) {
    h.ref0 = render_pointcloud(model, pose, crop_cam, cfg, pool);
    h.pose0 = pose;
    return h.ref0;
  }
  return reproject(h.ref0, h.pose0, pose, crop_cam, cfg, pool);
}

// Returns false when the predictor could not produce an update.
bool predict_step(const IncrementPredictor& predictor, const RgbXyzMap& query, const RgbXyzMap& ref,
                  Hypothesis& hyp) {
  try {
    const IncrementPrediction inc = predictor.predict(query, ref, hyp.pose);
    hyp.pose = apply_increment(hyp.pose, inc);
    hyp.score = inc.confidence;
    return true;
  } catch (const InsufficientOverlap&) {
    hyp.score = 0.0;
    return false;
  }
}

}  // namespace

HypothesisBatch refine_batch(const HypothesisBatch& batch, std::span<const RefineObject> objects,
                             const IncrementPredictor& predictor, const RefineConfig& cfg, ThreadPool* pool,
                             RefineDiagnostics* diagnostics) {
  cfg.validate();
  batch.validate();
  if (objects.size() != static_cast<std::size_t>(batch.objects))
    throw std::invalid_argument("refine: object count differs from batch");
  for (const auto& o : objects) {
    if (!o.frame || !o.model) throw std::invalid_argument("refine: null object input");
    o.frame->validate();
  }
  const auto wall0 = Clock::now();
  const std::size_t n_obj = objects.size();
  const std::size_t n_hyp = batch.entries.size();
  const int iters = cfg.iterations;

  HypothesisBatch out = batch;
  std::vector<HypState> hs(n_hyp);
  std::vector<int> failures(n_hyp, 0);
  std::vector<std::vector<RoiBox>> history(n_obj);
  std::vector<IterationTiming> timing(static_cast<std::size_t>(iters));
  std::vector<AmodalState> states;
  states.reserve(n_obj);
  for (const auto& o : objects) states.push_back(AmodalState::make(o.frame->visible, o.frame->occlusion, cfg.ampr));

  const auto roi_needed = [&](int i) { return i == 0 || cfg.ampr.schedule == AmprSchedule::EveryIteration; };

  if (cfg.mode == ExecutionMode::Batched) {
    std::vector<AmprResult> roi(n_obj);
    for (int i = 0; i < iters; ++i) {
      auto t0 = Clock::now();
      if (roi_needed(i)) {
        run_indexed(pool, n_obj, [&](std::size_t n) { roi[n] = ampr_realign(states[n], *objects[n].frame, cfg.ampr); });
      }
      for (std::size_t n = 0; n < n_obj; ++n) history[n].push_back(roi[n].box);
      run_indexed(pool, n_hyp, [&](std::size_t k) {
        Hypothesis& hyp = out.entries[k];
        const std::size_t n = static_cast<std::size_t>(hyp.object);
        hs[k].ref = warp_step(i, hs[k], hyp.pose, *objects[n].model, roi[n].camera, cfg.warp, nullptr);
      });
      timing[i].warp_seconds = seconds_since(t0);
      t0 = Clock::now();
      run_indexed(pool, n_hyp, [&](std::size_t k) {
        Hypothesis& hyp = out.entries[k];
        if (!predict_step(predictor, roi[static_cast<std::size_t>(hyp.object)].query, hs[k].ref, hyp)) ++failures[k];
      });
      timing[i].predictor_seconds = seconds_since(t0);
    }
  } else {
    for (std::size_t k = 0; k < n_hyp; ++k) {
      Hypothesis& hyp = out.entries[k];
      const std::size_t n = static_cast<std::size_t>(hyp.object);
      AmodalState state = states[n];
      AmprResult roi;
      for (int i = 0; i < iters; ++i) {
        auto t0 = Clock::now();
        if (roi_needed(i)) roi = ampr_realign(state, *objects[n].frame, cfg.ampr);
        if (hyp.index == 0) history[n].push_back(roi.box);
        hs[k].ref = warp_step(i, hs[k], hyp.pose, *objects[n].model, roi.camera, cfg.warp, pool);
        timing[i].warp_seconds += seconds_since(t0);
        t0 = Clock::now();
        if (!predict_step(predictor, roi.query, hs[k].ref, hyp)) ++failures[k];
        timing[i].predictor_seconds += seconds_since(t0);
      }
      hs[k] = {};
    }
  }

  if (diagnostics) {
    diagnostics->roi_history = std::move(history);
    diagnostics->timing = std::move(timing);
    diagnostics->failures = std::move(failures);
    diagnostics->wall_seconds = seconds_since(wall0);
  }
  return out;
}

std::vector<Hypothesis> select_best(const HypothesisBatch& batch) {
  batch.validate();
  std::vector<Hypothesis> best;
  for (int n = 0; n < batch.objects; ++n) {
    if (batch.per_object == 0) throw std::invalid_argument("select_best: no hypotheses");
    int arg = 0;
    for (int k = 1; k < batch.per_object; ++k) {
      if (batch.at(n, k).score > batch.at(n, arg).score) arg = k;
    }
    best.push_back(batch.at(n, arg));
  }
  return best;
}

}  // namespace pose6d
