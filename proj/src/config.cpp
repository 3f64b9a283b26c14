#include "pose6d/config.hpp"

#include "pose6d/models.hpp"

#include <functional>
#include <map>
#include <stdexcept>

namespace pose6d {

const char* to_string(FeatureSource s) { return s == FeatureSource::Oracle ? "oracle" : "file"; }
const char* to_string(ExecutionMode m) { return m == ExecutionMode::Batched ? "batched" : "sequential"; }
const char* to_string(AmprSchedule s) { return s == AmprSchedule::EveryIteration ? "every_iteration" : "once"; }

Json to_json(const RoiBox& b) { return Json::array({b.u_min, b.v_min, b.u_max, b.v_max}); }

Json to_json(const Pose& p) {
  const Eigen::Matrix3d r = p.rotation().matrix();
  Json rj = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) rj.push_back(r(i, k));
  return {{"R", rj}, {"t", {p.translation().x(), p.translation().y(), p.translation().z()}}};
}

void RunConfig::validate() const {
  sampler.validate();
  score.validate();
  if (score_bandwidth && !(*score_bandwidth > 0.0)) throw std::invalid_argument("config: score bandwidth must be > 0");
  warp.validate();
  refine.validate();
  metric.validate();
  make_predictor(predictor, alignment);
  if (alignment.robust_passes < 0 || !(alignment.residual_floor > 0.0) || !(alignment.max_color_distance > 0.0) ||
      alignment.query_stride < 1)
    throw std::invalid_argument("config: invalid alignment settings");
  if (B != score.top_k) throw std::invalid_argument("config: B must equal score.top_k");
  if (N < 1 || N != static_cast<int>(scene.object_ids.size()))
    throw std::invalid_argument("config: N must equal the number of scene objects");
  if (patch_stride < 1 || template_size < 16) throw std::invalid_argument("config: invalid feature geometry");
  if (scenes < 1) throw std::invalid_argument("config: scenes must be >= 1");
  scene.validate();
}

Json to_json(const RunConfig& c) {
  Json sampler{{"subdivision_level", c.sampler.subdivision_level},
               {"in_plane_step", c.sampler.in_plane_step},
               {"visibility_sigma", c.sampler.visibility_sigma ? Json(*c.sampler.visibility_sigma) : Json(nullptr)},
               {"depth_alpha", c.sampler.depth_alpha}};
  Json score{{"bandwidth", c.score_bandwidth ? Json(*c.score_bandwidth) : Json(nullptr)}, {"top_k", c.score.top_k}};
  Json warp{{"splat_radius", c.warp.splat_radius}, {"depth_tie_epsilon", c.warp.depth_tie_epsilon}};
  Json ampr{{"expansion", c.refine.ampr.expansion},
            {"crop_size", c.refine.ampr.crop_size},
            {"use_amodal", c.refine.ampr.use_amodal},
            {"occlusion_dilation", c.refine.ampr.occlusion_dilation},
            {"schedule", to_string(c.refine.ampr.schedule)}};
  Json alignment{{"robust_passes", c.alignment.robust_passes},
                 {"residual_floor", c.alignment.residual_floor},
                 {"max_color_distance", c.alignment.max_color_distance},
                 {"query_stride", c.alignment.query_stride}};
  Json refine{{"iterations", c.refine.iterations},
              {"predictor", c.predictor},
              {"mode", to_string(c.refine.mode)},
              {"ampr", ampr},
              {"alignment", alignment}};
  Json metric{{"add_threshold_fraction", c.metric.add_threshold_fraction},
              {"ar_thresholds", c.metric.ar_thresholds},
              {"max_points", c.metric.max_points},
              {"symmetric_ids", c.symmetric_ids}};
  Json features{{"source", to_string(c.feature_source)}, {"patch_stride", c.patch_stride}};
  Json scene{{"object_ids", c.scene.object_ids},
             {"z_min", c.scene.z_min},
             {"z_max", c.scene.z_max},
             {"occlusion_fraction", c.scene.occlusion_fraction},
             {"occlusion_tolerance", c.scene.occlusion_tolerance},
             {"margin", c.scene.margin},
             {"max_attempts", c.scene.max_attempts}};
  return {{"sampler", sampler},   {"score", score},
          {"warp", warp},         {"refine", refine},
          {"metric", metric},     {"features", features},
          {"template", {{"size", c.template_size}}},
          {"scene", scene},       {"scenes", c.scenes},
          {"N", c.N},             {"B", c.B},
          {"seed", c.seed}};
}

namespace {

using Setter = std::function<void(const Json&)>;

void apply(const Json& j, const std::string& where, const std::map<std::string, Setter>& setters) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto s = setters.find(it.key());
    if (s == setters.end()) throw std::invalid_argument("config: unknown key " + where + "." + it.key());
    try {
      s->second(it.value());
    } catch (const Json::exception& e) {
      throw std::invalid_argument("config: bad value for " + where + "." + it.key() + ": " + e.what());
    }
  }
}

template <typename T>
Setter set(T& field) {
  return [&field](const Json& v) { field = v.get<T>(); };
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  bool ids_given = false, n_given = false;
  apply(j, "config",
        {{"sampler",
          [&](const Json& v) {
            apply(v, "sampler",
                  {{"subdivision_level", set(c.sampler.subdivision_level)},
                   {"in_plane_step", set(c.sampler.in_plane_step)},
                   {"visibility_sigma",
                    [&](const Json& x) {
                      c.sampler.visibility_sigma = x.is_null() ? std::nullopt : std::optional<double>(x.get<double>());
                    }},
                   {"depth_alpha", set(c.sampler.depth_alpha)}});
          }},
         {"score",
          [&](const Json& v) {
            apply(v, "score",
                  {{"bandwidth",
                    [&](const Json& x) {
                      c.score_bandwidth = x.is_null() ? std::nullopt : std::optional<double>(x.get<double>());
                    }},
                   {"top_k", set(c.score.top_k)}});
          }},
         {"warp",
          [&](const Json& v) {
            apply(v, "warp", {{"splat_radius", set(c.warp.splat_radius)}, {"depth_tie_epsilon", set(c.warp.depth_tie_epsilon)}});
          }},
         {"refine",
          [&](const Json& v) {
            apply(v, "refine",
                  {{"iterations", set(c.refine.iterations)},
                   {"predictor", set(c.predictor)},
                   {"mode",
                    [&](const Json& x) {
                      const auto s = x.get<std::string>();
                      if (s == "batched") c.refine.mode = ExecutionMode::Batched;
                      else if (s == "sequential") c.refine.mode = ExecutionMode::Sequential;
                      else throw std::invalid_argument("config: refine.mode must be batched or sequential");
                    }},
                   {"ampr",
                    [&](const Json& a) {
                      apply(a, "refine.ampr",
                            {{"expansion", set(c.refine.ampr.expansion)},
                             {"crop_size", set(c.refine.ampr.crop_size)},
                             {"use_amodal", set(c.refine.ampr.use_amodal)},
                             {"occlusion_dilation", set(c.refine.ampr.occlusion_dilation)},
                             {"schedule", [&](const Json& x) {
                                const auto s = x.get<std::string>();
                                if (s == "every_iteration") c.refine.ampr.schedule = AmprSchedule::EveryIteration;
                                else if (s == "once") c.refine.ampr.schedule = AmprSchedule::Once;
                                else throw std::invalid_argument("config: refine.ampr.schedule must be every_iteration or once");
                              }}});
                    }},
                   {"alignment", [&](const Json& a) {
                      apply(a, "refine.alignment",
                            {{"robust_passes", set(c.alignment.robust_passes)},
                             {"residual_floor", set(c.alignment.residual_floor)},
                             {"max_color_distance", set(c.alignment.max_color_distance)},
                             {"query_stride", set(c.alignment.query_stride)}});
                    }}});
          }},
         {"metric",
          [&](const Json& v) {
            apply(v, "metric",
                  {{"add_threshold_fraction", set(c.metric.add_threshold_fraction)},
                   {"ar_thresholds", set(c.metric.ar_thresholds)},
                   {"max_points", set(c.metric.max_points)},
                   {"symmetric_ids", set(c.symmetric_ids)}});
          }},
         {"features",
          [&](const Json& v) {
            apply(v, "features",
                  {{"source",
                    [&](const Json& x) {
                      const auto s = x.get<std::string>();
                      if (s == "oracle") c.feature_source = FeatureSource::Oracle;
                      else if (s == "file") c.feature_source = FeatureSource::File;
                      else throw std::invalid_argument("config: features.source must be oracle or file");
                    }},
                   {"patch_stride", set(c.patch_stride)}});
          }},
         {"template", [&](const Json& v) { apply(v, "template", {{"size", set(c.template_size)}}); }},
         {"scene",
          [&](const Json& v) {
            apply(v, "scene",
                  {{"object_ids",
                    [&](const Json& x) {
                      c.scene.object_ids = x.get<std::vector<int>>();
                      ids_given = true;
                    }},
                   {"z_min", set(c.scene.z_min)},
                   {"z_max", set(c.scene.z_max)},
                   {"occlusion_fraction", set(c.scene.occlusion_fraction)},
                   {"occlusion_tolerance", set(c.scene.occlusion_tolerance)},
                   {"margin", set(c.scene.margin)},
                   {"max_attempts", set(c.scene.max_attempts)}});
          }},
         {"scenes", set(c.scenes)},
         {"N",
          [&](const Json& v) {
            c.N = v.get<int>();
            n_given = true;
          }},
         {"B", set(c.B)},
         {"seed", set(c.seed)}});
  if (n_given && !ids_given) {
    const auto& lib = default_library();
    c.scene.object_ids.clear();
    for (int k = 0; k < c.N; ++k) c.scene.object_ids.push_back(lib[static_cast<std::size_t>(k) % lib.size()].id);
  } else if (ids_given && !n_given) {
    c.N = static_cast<int>(c.scene.object_ids.size());
  }
  c.scene.warp = c.warp;
  c.scene.patch_stride = c.patch_stride;
  c.refine.warp = c.warp;
  c.validate();
  return c;
}

}  // namespace pose6d
