#pragma once

#include "pose6d/frame.hpp"
#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/parallel.hpp"
#include "pose6d/sampler.hpp"
#include "pose6d/warp.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pose6d {

struct Hypothesis {
  int object = 0;
  int index = 0;
  Pose pose;
  double score = 0.0;
};

/// N objects x B hypotheses, object-major: entry n*B + b holds (n, b).
struct HypothesisBatch {
  int objects = 0;
  int per_object = 0;
  std::vector<Hypothesis> entries;

  static HypothesisBatch make(int objects, int per_object);
  Hypothesis& at(int n, int b) { return entries[static_cast<std::size_t>(n) * per_object + b]; }
  const Hypothesis& at(int n, int b) const { return entries[static_cast<std::size_t>(n) * per_object + b]; }
  /// Throws std::invalid_argument on a broken layout.
  void validate() const;
};

/// Additive increment: R' = exp(update.rotation) * R, T' = T + update.translation.
struct IncrementPrediction {
  TangentUpdate update;
  double confidence = 1.0;

  void validate() const;
};

Pose apply_increment(const Pose& pose, const IncrementPrediction& inc);

class InsufficientOverlap : public std::runtime_error {
 public:
  explicit InsufficientOverlap(std::size_t pairs)
      : std::runtime_error("insufficient overlap: " + std::to_string(pairs) + " co-valid samples"), pairs_(pairs) {}
  std::size_t pairs() const { return pairs_; }

 private:
  std::size_t pairs_;
};

struct AlignmentConfig {
  /// Refit passes after the first fit, each on the current inlier set.
  int robust_passes = 2;
  /// Lower bound on the robust residual spread (meters).
  double residual_floor = 2e-3;
  /// Appearance association: maximum RGB distance (unit cube) for a match.
  double max_color_distance = 0.03;
  /// Appearance association: use every n-th query row and column.
  int query_stride = 2;
};

struct RigidFit {
  Pose transform;  ///< maps source points onto destination points
  std::size_t inliers = 0;  ///< pairs passing the inlier rule under the final transform
  std::size_t pairs = 0;
};

/// Weighted least-squares rigid alignment (SVD) with residual-based inlier
/// refits. Inliers: residual <= median + 3 sigma with
/// sigma = max(1.4826 MAD, residual_floor). Throws InsufficientOverlap for
/// fewer than 3 pairs.
RigidFit fit_rigid(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst,
                   std::span<const double> weights, const AlignmentConfig& cfg = {});

/// Rigid alignment of reference XYZ onto query XYZ over pixels valid in both
/// maps. The update is the raw camera-frame transform (rotation as axis-angle)
/// and the confidence its inlier fraction.
IncrementPrediction geometric_increment(const RgbXyzMap& query, const RgbXyzMap& reference,
                                        const AlignmentConfig& cfg = {});

/// Same solver, but each query pixel is paired with the reference pixel of
/// nearest RGB, so surface points are matched by appearance rather than by
/// image location. The confidence counts inliers over all sampled valid query
/// pixels, so unmatched query surface lowers it.
IncrementPrediction appearance_increment(const RgbXyzMap& query, const RgbXyzMap& reference,
                                         const AlignmentConfig& cfg = {});

/// Pose-increment predictor used by the refinement loop. Implementations
/// must be pure: identical inputs give identical outputs on any thread.
class IncrementPredictor {
 public:
  virtual ~IncrementPredictor() = default;
  /// Throws InsufficientOverlap when no update can be computed.
  virtual IncrementPrediction predict(const RgbXyzMap& query, const RgbXyzMap& reference,
                                      const Pose& current) const = 0;
  virtual std::string name() const = 0;
};

/// Always returns a zero update with confidence 1.
class ZeroPredictor final : public IncrementPredictor {
 public:
  IncrementPrediction predict(const RgbXyzMap&, const RgbXyzMap&, const Pose&) const override { return {}; }
  std::string name() const override { return "zero"; }
};

enum class Association { Pixel, Appearance };

/// Rigid-alignment baseline. The camera-frame alignment (R0, t0) is turned
/// into the additive form R' = R0 R, T' = T + (R0 T + t0 - T).
class GeometricPredictor final : public IncrementPredictor {
 public:
  explicit GeometricPredictor(Association association = Association::Appearance, AlignmentConfig cfg = {})
      : association_(association), cfg_(cfg) {}
  IncrementPrediction predict(const RgbXyzMap& query, const RgbXyzMap& reference,
                              const Pose& current) const override;
  std::string name() const override;

 private:
  Association association_;
  AlignmentConfig cfg_;
};

std::unique_ptr<IncrementPredictor> make_predictor(const std::string& name, const AlignmentConfig& cfg = {});

// ---------------------------------------------------------------------------
// Amodal ROI re-alignment

/// Continuous box edges in pixel coordinates (pixel k spans [k-0.5, k+0.5]).
struct RoiBox {
  double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;
  Eigen::Vector2d center() const { return {0.5 * (u_min + u_max), 0.5 * (v_min + v_max)}; }
  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

enum class AmprSchedule { EveryIteration, Once };

struct AmprConfig {
  double expansion = 1.2;
  int crop_size = 160;
  /// false: crop on the visible mask only.
  bool use_amodal = true;
  /// Heuristic occlusion stand-in when no mask is supplied: dilate the
  /// visible mask by this many pixels (0 = none).
  int occlusion_dilation = 0;
  AmprSchedule schedule = AmprSchedule::EveryIteration;

  void validate() const;
};

struct AmodalState {
  BinaryMask visible;
  BinaryMask occlusion;
  BinaryMask amodal;  ///< always visible | occlusion
  RoiBox box;
  int crop_size = 160;

  /// Builds the union and the ROI. Throws std::invalid_argument when the
  /// amodal mask is empty.
  static AmodalState make(const BinaryMask& visible, const std::optional<BinaryMask>& occlusion,
                          const AmprConfig& cfg);
};

/// Tight bbox of the mask, grown to a square of side expansion * max(w, h)
/// about its center, then intersected with the image.
RoiBox roi_from_mask(const BinaryMask& mask, double expansion);

/// Intrinsics of the crop resampled to size x size pixels.
CameraModel crop_camera(const CameraModel& cam, const RoiBox& box, int size);

/// Nearest-neighbour crop of the visible, depth-valid query pixels. XYZ stays
/// in the full camera frame.
RgbXyzMap crop_query(const ObservationFrame& frame, const RoiBox& box, const CameraModel& crop_cam);

struct AmprResult {
  RoiBox box;
  CameraModel camera;
  RgbXyzMap query;
};

/// Recomputes the amodal union and ROI, then crops and resizes the query.
AmprResult ampr_realign(AmodalState& state, const ObservationFrame& frame, const AmprConfig& cfg);

// ---------------------------------------------------------------------------
// Batched refinement

enum class ExecutionMode { Batched, Sequential };

struct RefineConfig {
  int iterations = 4;
  WarpConfig warp;
  AmprConfig ampr;
  ExecutionMode mode = ExecutionMode::Batched;

  void validate() const;
};

struct RefineObject {
  const ObservationFrame* frame = nullptr;
  const ObjectModel* model = nullptr;
};

struct IterationTiming {
  double warp_seconds = 0.0;
  double predictor_seconds = 0.0;
};

struct RefineDiagnostics {
  /// roi_history[n][i]: ROI used by object n at iteration i.
  std::vector<std::vector<RoiBox>> roi_history;
  std::vector<IterationTiming> timing;
  /// Predictor failures per hypothesis (entry order).
  std::vector<int> failures;
  double wall_seconds = 0.0;
};

/// i = 0 renders each hypothesis into its object's crop; later iterations
/// re-project that first render to the current pose. Scores end up as the
/// final-iteration confidence (0 when the predictor failed).
HypothesisBatch refine_batch(const HypothesisBatch& batch, std::span<const RefineObject> objects,
                             const IncrementPredictor& predictor, const RefineConfig& cfg,
                             ThreadPool* pool = nullptr, RefineDiagnostics* diagnostics = nullptr);

/// Per object, the hypothesis with maximal score (lowest index on ties).
std::vector<Hypothesis> select_best(const HypothesisBatch& batch);

}  // namespace pose6d
