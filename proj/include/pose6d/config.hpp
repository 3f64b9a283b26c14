#pragma once

#include "pose6d/metrics.hpp"
#include "pose6d/refine.hpp"
#include "pose6d/sampler.hpp"
#include "pose6d/scene.hpp"
#include "pose6d/scorer.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pose6d {

using Json = nlohmann::ordered_json;

enum class FeatureSource { Oracle, File };

struct RunConfig {
  SamplerConfig sampler;
  ScoreConfig score;
  /// Absent: 0.1 x the object diameter.
  std::optional<double> score_bandwidth;
  WarpConfig warp;
  RefineConfig refine;
  std::string predictor = "geometric-appearance";
  AlignmentConfig alignment;
  MetricConfig metric;
  /// Library ids evaluated with ADD-S instead of ADD.
  std::vector<int> symmetric_ids;
  FeatureSource feature_source = FeatureSource::Oracle;
  int patch_stride = 5;
  int template_size = 128;
  SceneSpec scene;
  /// Number of scenes for synth, eval and bench.
  int scenes = 1;
  int N = 5;
  int B = 7;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless B equals score.top_k, the
  /// iteration count is at least 1, N matches the scene object list and
  /// every sub-config is valid.
  void validate() const;
};

/// Full resolved configuration.
Json to_json(const RunConfig& cfg);
/// Starts from defaults and applies the keys present in `j`. Unknown keys
/// throw std::invalid_argument. When N is given without scene.object_ids the
/// object list cycles through the library ids.
RunConfig run_config_from_json(const Json& j);

const char* to_string(FeatureSource s);
const char* to_string(ExecutionMode m);
const char* to_string(AmprSchedule s);

Json to_json(const RoiBox& b);
Json to_json(const Pose& p);

}  // namespace pose6d
