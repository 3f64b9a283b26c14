#include "pose6d/pipeline.hpp"

#include "pose6d/metrics.hpp"
#include "pose6d/warp.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace pose6d {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ScoreConfig score_config_for(const ObjectModel& model, const RunConfig& cfg) {
  ScoreConfig sc = cfg.score;
  sc.bandwidth = cfg.score_bandwidth.value_or(ScoreConfig::default_bandwidth(model.diameter()));
  return sc;
}

DepthMap masked_depth(const DepthMap& depth, const BinaryMask& mask) {
  DepthMap out(depth.width, depth.height, 0.0);
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (mask.data[i]) out.data[i] = depth.data[i];
  return out;
}

// Refines the given per-object hypotheses; objects with an empty list are
// skipped and keep their status.
void run_refinement(std::span<const ObservationFrame> frames, std::span<const ObjectModel> models,
                    const std::vector<std::vector<Hypothesis>>& initial, const RunConfig& cfg, ThreadPool* pool,
                    EstimateResult& out) {
  std::vector<std::size_t> active;
  for (std::size_t n = 0; n < initial.size(); ++n)
    if (!initial[n].empty() && out.objects[n].ok) active.push_back(n);
  if (active.empty()) return;

  HypothesisBatch batch = HypothesisBatch::make(static_cast<int>(active.size()), cfg.B);
  std::vector<RefineObject> objects;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const auto& hyps = initial[active[a]];
    if (hyps.size() != static_cast<std::size_t>(cfg.B))
      throw std::invalid_argument("refine: expected B hypotheses per object");
    for (int b = 0; b < cfg.B; ++b) {
      Hypothesis h = hyps[static_cast<std::size_t>(b)];
      h.object = static_cast<int>(a);
      h.index = b;
      batch.at(static_cast<int>(a), b) = h;
    }
    objects.push_back({&frames[active[a]], &models[active[a]]});
  }
  RefineConfig rc = cfg.refine;
  rc.warp = cfg.warp;
  const auto predictor = make_predictor(cfg.predictor, cfg.alignment);
  const HypothesisBatch refined = refine_batch(batch, objects, *predictor, rc, pool, &out.refine);
  const std::vector<Hypothesis> best = select_best(refined);
  for (std::size_t a = 0; a < active.size(); ++a) {
    ObjectResult& r = out.objects[active[a]];
    r.pose = best[a].pose;
    r.score = best[a].score;
    r.roi_history = out.refine.roi_history[a];
    r.predictor_failures = 0;
    for (int b = 0; b < cfg.B; ++b)
      r.predictor_failures += out.refine.failures[a * static_cast<std::size_t>(cfg.B) + static_cast<std::size_t>(b)];
  }
}

}  // namespace

CameraModel template_camera(int size) {
  const CameraModel d = default_camera();
  const double c = 0.5 * (size - 1);
  return CameraModel(d.fx(), d.fy(), c, c, size, size, d.depth_scale());
}

TemplateBank TemplateBank::build(const ObjectModel& model, const RunConfig& cfg, ThreadPool* pool) {
  TemplateBank bank;
  bank.object_id = model.id();
  bank.camera = template_camera(cfg.template_size);
  bank.grid = PatchGrid::covering(cfg.template_size, cfg.template_size, cfg.patch_stride);
  const std::vector<Rotation> rotations = rotation_hypotheses(model, cfg.sampler);
  bank.templates.resize(rotations.size());
  run_indexed(pool, rotations.size(), [&](std::size_t j) {
    Template& t = bank.templates[j];
    t.rotation = rotations[j];
    const Pose pose = template_pose(rotations[j], model, cfg.sampler);
    const RgbXyzMap obj = to_object_frame(render_pointcloud(model, pose, bank.camera, cfg.warp), pose);
    t.mask = obj.valid_mask();
    t.features = FeatureMap(bank.grid, 4);
    t.centers.assign(static_cast<std::size_t>(bank.grid.size()), Eigen::Vector3d::Zero());
    t.center_valid.assign(static_cast<std::size_t>(bank.grid.size()), 0);
    for (int p = 0; p < bank.grid.size(); ++p) {
      const Eigen::Vector2i c = bank.grid.center_pixel(p);
      if (c.x() >= obj.width || c.y() >= obj.height) continue;
      const std::size_t i = obj.index(c.x(), c.y());
      if (!obj.is_valid(i)) continue;
      const auto f = template_oracle_feature(obj.xyz[i], model.diameter());
      std::copy(f.begin(), f.end(), t.features.at(p));
      t.centers[static_cast<std::size_t>(p)] = obj.xyz[i];
      t.center_valid[static_cast<std::size_t>(p)] = 1;
    }
  });
  return bank;
}

const TemplateBank& TemplateCache::get(const ObjectModel& model, const RunConfig& cfg, ThreadPool* pool) {
  auto& slot = banks_[model.id()];
  if (!slot) slot = std::make_unique<TemplateBank>(TemplateBank::build(model, cfg, pool));
  return *slot;
}

Proposal propose(const ObservationFrame& frame, const ObjectModel& model, const TemplateBank& bank,
                 const RunConfig& cfg) {
  frame.validate();
  if (!frame.features) throw std::invalid_argument("propose: no query features");
  if (count_true(frame.visible) == 0) throw std::invalid_argument("propose: empty visible mask");
  const FeatureMap& fq = *frame.features;
  const DepthMap depth = masked_depth(frame.depth, frame.visible);
  const ScoreConfig sc = score_config_for(model, cfg);

  RgbXyzMap centers(bank.camera.width(), bank.camera.height());
  std::vector<ScoredHypothesis> scored;
  scored.reserve(bank.templates.size());
  for (std::size_t j = 0; j < bank.templates.size(); ++j) {
    const Template& t = bank.templates[j];
    const SimilarityMatrix s = masked_similarity(fq, frame.visible, t.features, t.mask);
    const std::vector<PatchMatch> matches = assign_nn(s);
    std::vector<std::size_t> touched;
    for (int p = 0; p < bank.grid.size(); ++p) {
      if (!t.center_valid[static_cast<std::size_t>(p)]) continue;
      const Eigen::Vector2i c = bank.grid.center_pixel(p);
      const std::size_t i = centers.index(c.x(), c.y());
      centers.set(i, Eigen::Vector3d::Zero(), t.centers[static_cast<std::size_t>(p)]);
      touched.push_back(i);
    }
    const LiftResult lifted = lift(matches, fq.grid, depth, frame.camera, bank.grid, centers);
    for (std::size_t i : touched) {
      centers.valid[i] = 0;
      centers.xyz[i].setZero();
    }
    ScoredHypothesis h;
    h.rotation = t.rotation;
    h.correspondence_count = static_cast<int>(lifted.set.pairs.size());
    h.score = score_rotation(t.rotation, lifted.set, sc);
    h.source_index = static_cast<int>(j);
    scored.push_back(h);
  }
  Proposal out;
  out.scored = static_cast<int>(scored.size());
  out.top = select_top_k(scored, sc);
  if (out.top.empty() || !(out.top.front().score > 0.0))
    throw std::invalid_argument("propose: no correspondences");
  out.translation = estimate_translation(frame.visible, frame.depth, frame.camera);
  return out;
}

EstimateResult estimate(std::span<const ObservationFrame> frames, std::span<const ObjectModel> models,
                        const RunConfig& cfg, ThreadPool* pool, TemplateCache* cache) {
  cfg.validate();
  if (frames.size() != models.size()) throw std::invalid_argument("estimate: frames and models differ in count");
  const auto t_all = Clock::now();
  TemplateCache local;
  if (!cache) cache = &local;

  EstimateResult out;
  out.objects.resize(frames.size());
  std::vector<const TemplateBank*> banks(frames.size());
  auto t0 = Clock::now();
  for (std::size_t n = 0; n < frames.size(); ++n) {
    out.objects[n].object_id = models[n].id();
    banks[n] = &cache->get(models[n], cfg, pool);
  }
  out.template_seconds = seconds_since(t0);

  t0 = Clock::now();
  std::vector<std::vector<Hypothesis>> initial(frames.size());
  run_indexed(pool, frames.size(), [&](std::size_t n) {
    ObjectResult& r = out.objects[n];
    const auto tp = Clock::now();
    try {
      if (frames[n].object_id != models[n].id()) throw std::invalid_argument("estimate: frame and model ids differ");
      const Proposal p = propose(frames[n], models[n], *banks[n], cfg);
      if (p.top.size() != static_cast<std::size_t>(cfg.B))
        throw std::invalid_argument("estimate: fewer rotation hypotheses than B");
      r.hypotheses_scored = p.scored;
      r.hypotheses_selected = static_cast<int>(p.top.size());
      for (std::size_t b = 0; b < p.top.size(); ++b)
        initial[n].push_back({static_cast<int>(n), static_cast<int>(b), Pose(p.top[b].rotation, p.translation), p.top[b].score});
      r.initial = initial[n];
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
      initial[n].clear();
    }
    r.propose_seconds = seconds_since(tp);
  });
  out.propose_seconds = seconds_since(t0);

  run_refinement(frames, models, initial, cfg, pool, out);
  out.total_seconds = seconds_since(t_all);
  return out;
}

EstimateResult refine_from(std::span<const ObservationFrame> frames, std::span<const ObjectModel> models,
                           const std::vector<std::vector<Hypothesis>>& initial, const RunConfig& cfg,
                           ThreadPool* pool) {
  cfg.validate();
  if (frames.size() != models.size() || initial.size() != frames.size())
    throw std::invalid_argument("refine: frames, models and hypotheses differ in count");
  const auto t_all = Clock::now();
  EstimateResult out;
  out.objects.resize(frames.size());
  for (std::size_t n = 0; n < frames.size(); ++n) {
    ObjectResult& r = out.objects[n];
    r.object_id = models[n].id();
    r.initial = initial[n];
    r.hypotheses_selected = static_cast<int>(initial[n].size());
    r.ok = !initial[n].empty();
    if (!r.ok) r.error = "no initial hypotheses";
  }
  run_refinement(frames, models, initial, cfg, pool, out);
  out.total_seconds = seconds_since(t_all);
  return out;
}

std::vector<ResultRow> result_rows(const EstimateResult& r, int scene_id, int im_id) {
  std::vector<ResultRow> rows;
  for (const auto& o : r.objects) {
    if (!o.ok) continue;
    ResultRow row;
    row.scene_id = scene_id;
    row.im_id = im_id;
    row.obj_id = o.object_id;
    row.score = o.score;
    row.pose = o.pose;
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const EstimateResult& r) {
  Json objects = Json::array();
  for (const auto& o : r.objects) {
    Json roi = Json::array();
    for (const auto& b : o.roi_history) roi.push_back(to_json(b));
    Json init = Json::array();
    for (const auto& h : o.initial) {
      Json e = to_json(h.pose);
      e["score"] = h.score;
      init.push_back(e);
    }
    Json j{{"obj_id", o.object_id},
           {"ok", o.ok},
           {"error", o.error},
           {"score", o.score},
           {"pose", o.ok ? to_json(o.pose) : Json(nullptr)},
           {"hypotheses_scored", o.hypotheses_scored},
           {"hypotheses_selected", o.hypotheses_selected},
           {"initial", init},
           {"roi_history", roi},
           {"predictor_failures", o.predictor_failures},
           {"propose_seconds", o.propose_seconds}};
    objects.push_back(j);
  }
  Json iters = Json::array();
  for (std::size_t i = 0; i < r.refine.timing.size(); ++i)
    iters.push_back({{"iteration", i},
                     {"warp_seconds", r.refine.timing[i].warp_seconds},
                     {"predictor_seconds", r.refine.timing[i].predictor_seconds}});
  return {{"objects", objects},
          {"timing",
           {{"template_seconds", r.template_seconds},
            {"propose_seconds", r.propose_seconds},
            {"refine_seconds", r.refine.wall_seconds},
            {"total_seconds", r.total_seconds},
            {"iterations", iters}}}};
}

BenchRun bench_throughput(const RunConfig& cfg, ExecutionMode mode, ThreadPool* pool) {
  cfg.validate();
  const SyntheticScene scene = generate_scene(cfg.scene, cfg.seed);
  std::vector<ObservationFrame> frames;
  std::vector<ObjectModel> models;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    frames.push_back(scene.frame(k, cfg.refine.ampr.use_amodal));
    models.push_back(scene.objects[k].model);
  }
  TemplateCache cache;
  HypothesisBatch batch = HypothesisBatch::make(static_cast<int>(frames.size()), cfg.B);
  std::vector<RefineObject> objects;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const Proposal p = propose(frames[n], models[n], cache.get(models[n], cfg, pool), cfg);
    if (p.top.size() != static_cast<std::size_t>(cfg.B)) throw std::invalid_argument("bench: fewer hypotheses than B");
    for (int b = 0; b < cfg.B; ++b)
      batch.at(static_cast<int>(n), b) = {static_cast<int>(n), b, Pose(p.top[static_cast<std::size_t>(b)].rotation, p.translation),
                                          p.top[static_cast<std::size_t>(b)].score};
    objects.push_back({&frames[n], &models[n]});
  }
  RefineConfig rc = cfg.refine;
  rc.warp = cfg.warp;
  rc.mode = mode;
  const auto predictor = make_predictor(cfg.predictor, cfg.alignment);
  BenchRun run;
  run.mode = mode;
  run.result = refine_batch(batch, objects, *predictor, rc, pool, &run.diagnostics);
  return run;
}

double max_pose_difference(const HypothesisBatch& a, const HypothesisBatch& b) {
  if (a.entries.size() != b.entries.size()) throw std::invalid_argument("pose difference: batch sizes differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const Pose& p = a.entries[k].pose;
    const Pose& q = b.entries[k].pose;
    worst = std::max(worst, angular_distance(p.rotation(), q.rotation()) + (p.translation() - q.translation()).norm());
  }
  return worst;
}

Json to_json(const BenchRun& run, unsigned threads) {
  const std::size_t hyps = run.result.entries.size();
  const std::size_t iters = run.diagnostics.timing.size();
  Json per = Json::array();
  for (std::size_t i = 0; i < iters; ++i)
    per.push_back({{"iteration", i},
                   {"warp_seconds", run.diagnostics.timing[i].warp_seconds},
                   {"predictor_seconds", run.diagnostics.timing[i].predictor_seconds}});
  const double wall = run.diagnostics.wall_seconds;
  return {{"mode", to_string(run.mode)},
          {"threads", threads},
          {"N", run.result.objects},
          {"B", run.result.per_object},
          {"iterations", iters},
          {"wall_seconds", wall},
          {"hypotheses_per_second", wall > 0.0 ? static_cast<double>(hyps * iters) / wall : 0.0},
          {"per_iteration", per}};
}

EvalReport evaluate(const std::vector<ResultRow>& rows, const std::vector<SyntheticScene>& scenes,
                    const RunConfig& cfg) {
  cfg.metric.validate();
  EvalReport rep;
  std::size_t correct = 0;
  double recall_sum = 0.0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (const auto& o : scenes[s].objects) {
      EvalEntry e;
      e.scene_id = static_cast<int>(s);
      e.obj_id = o.model.id();
      e.diameter = o.model.diameter();
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
        return r.scene_id == e.scene_id && r.obj_id == e.obj_id;
      });
      e.found = it != rows.end();
      if (e.found) {
        e.add = add_error(o.model, it->pose, o.gt, cfg.metric.max_points);
        e.adds = adds_error(o.model, it->pose, o.gt, cfg.metric.max_points);
        const bool sym = std::find(cfg.symmetric_ids.begin(), cfg.symmetric_ids.end(), e.obj_id) != cfg.symmetric_ids.end();
        e.error = sym ? e.adds : e.add;
        const double err[1] = {e.error};
        if (e.error < cfg.metric.add_threshold_fraction * e.diameter) ++correct;
        recall_sum += threshold_recall(err, e.diameter, cfg.metric);
      }
      rep.entries.push_back(e);
    }
  }
  const double n = static_cast<double>(rep.entries.size());
  rep.add_accuracy = n > 0 ? 100.0 * static_cast<double>(correct) / n : 0.0;
  rep.recall = n > 0 ? recall_sum / n : 0.0;
  rep.average_recall = average_recall(rep.recall, rep.recall, rep.recall);
  return rep;
}

Json to_json(const EvalReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"scene_id", e.scene_id},
                       {"obj_id", e.obj_id},
                       {"found", e.found},
                       {"add", e.add},
                       {"adds", e.adds},
                       {"error", e.error},
                       {"diameter", e.diameter}});
  return {{"entries", entries},
          {"add_accuracy", r.add_accuracy},
          {"recall", r.recall},
          {"average_recall", r.average_recall}};
}

}  // namespace pose6d
