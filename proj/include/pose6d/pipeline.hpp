#pragma once

#include "pose6d/config.hpp"
#include "pose6d/frame.hpp"
#include "pose6d/io.hpp"
#include "pose6d/matcher.hpp"
#include "pose6d/parallel.hpp"
#include "pose6d/refine.hpp"
#include "pose6d/scene.hpp"
#include "pose6d/scorer.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pose6d {

/// Square template camera with the default focal lengths.
CameraModel template_camera(int size);

struct Template {
  Rotation rotation;
  BinaryMask mask;
  FeatureMap features;
  /// Object-frame surface point at each patch centre (valid when the
  /// centre pixel is covered).
  std::vector<Eigen::Vector3d> centers;
  std::vector<std::uint8_t> center_valid;
};

/// Renders of one model at every rotation hypothesis.
struct TemplateBank {
  int object_id = 0;
  CameraModel camera = template_camera(128);
  PatchGrid grid;
  std::vector<Template> templates;

  static TemplateBank build(const ObjectModel& model, const RunConfig& cfg, ThreadPool* pool = nullptr);
};

/// Builds banks on first use, keyed by object id.
class TemplateCache {
 public:
  const TemplateBank& get(const ObjectModel& model, const RunConfig& cfg, ThreadPool* pool = nullptr);

 private:
  std::map<int, std::unique_ptr<TemplateBank>> banks_;
};

struct Proposal {
  std::vector<ScoredHypothesis> top;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  /// Number of rotation hypotheses that were scored.
  int scored = 0;
};

/// Mask-aware proposal: scores every template rotation against the query
/// features and returns the top_k rotations with the back-projected
/// translation. Throws std::invalid_argument for missing features, an empty
/// mask or when no template yields correspondences.
Proposal propose(const ObservationFrame& frame, const ObjectModel& model, const TemplateBank& bank,
                 const RunConfig& cfg);

struct ObjectResult {
  int object_id = 0;
  bool ok = false;
  std::string error;
  Pose pose;
  double score = 0.0;
  int hypotheses_scored = 0;
  int hypotheses_selected = 0;
  std::vector<Hypothesis> initial;
  std::vector<RoiBox> roi_history;
  int predictor_failures = 0;
  double propose_seconds = 0.0;
};

struct EstimateResult {
  std::vector<ObjectResult> objects;
  RefineDiagnostics refine;
  double template_seconds = 0.0;
  double propose_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Proposal, batched refinement and selection for every (frame, model)
/// pair. A failing object is reported and left out of refinement.
EstimateResult estimate(std::span<const ObservationFrame> frames, std::span<const ObjectModel> models,
                        const RunConfig& cfg, ThreadPool* pool = nullptr, TemplateCache* cache = nullptr);

/// Refinement from given initial hypotheses (B per object, object order).
EstimateResult refine_from(std::span<const ObservationFrame> frames, std::span<const ObjectModel> models,
                           const std::vector<std::vector<Hypothesis>>& initial, const RunConfig& cfg,
                           ThreadPool* pool = nullptr);

std::vector<ResultRow> result_rows(const EstimateResult& r, int scene_id, int im_id = 0);

/// Timing and per-object details. Timings make this non-deterministic.
Json to_json(const EstimateResult& r);

struct BenchRun {
  ExecutionMode mode = ExecutionMode::Batched;
  HypothesisBatch result;
  RefineDiagnostics diagnostics;
};

/// Refines the proposals of one synthetic scene (seed cfg.seed) in the
/// given mode.
BenchRun bench_throughput(const RunConfig& cfg, ExecutionMode mode, ThreadPool* pool = nullptr);

/// Maximum pose difference (rotation angle + translation norm) between runs.
double max_pose_difference(const HypothesisBatch& a, const HypothesisBatch& b);

Json to_json(const BenchRun& run, unsigned threads);

struct EvalEntry {
  int scene_id = 0;
  int obj_id = 0;
  bool found = false;
  double add = 0.0;
  double adds = 0.0;
  /// ADD-S for symmetric ids, ADD otherwise (meters).
  double error = 0.0;
  double diameter = 0.0;
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  double add_accuracy = 0.0;
  double recall = 0.0;
  double average_recall = 0.0;
};

/// Scores result rows against scene ground truth. Objects without a row
/// count as failures.
EvalReport evaluate(const std::vector<ResultRow>& rows, const std::vector<SyntheticScene>& scenes,
                    const RunConfig& cfg);

Json to_json(const EvalReport& r);

}  // namespace pose6d
