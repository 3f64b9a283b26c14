#include "pose6d/config.hpp"
#include "pose6d/io.hpp"
#include "pose6d/models.hpp"
#include "pose6d/pipeline.hpp"
#include "pose6d/scene.hpp"
#include "pose6d/warp.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace pose6d;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
};

std::string scene_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", i);
  return buf;
}

fs::path model_path(const fs::path& data, int id) { return data / "models" / ("obj_" + scene_name(id) + ".ply"); }

RunConfig resolve_config(const Globals& g) {
  Json j = Json::object();
  if (!g.config_path.empty()) {
    try {
      j = Json::parse(read_text_file(g.config_path));
    } catch (const Json::parse_error& e) {
      throw IoError(IoError::Kind::Malformed, g.config_path, e.what(), static_cast<std::int64_t>(e.byte));
    }
  }
  if (g.seed) j["seed"] = *g.seed;
  return run_config_from_json(j);
}

std::vector<fs::path> scene_dirs(const fs::path& data) {
  const fs::path root = data / "scenes";
  if (!fs::is_directory(root)) throw IoError(IoError::Kind::MissingFile, root.string(), "no scenes directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

struct LoadedScene {
  int scene_id = 0;
  SyntheticScene scene;
  std::vector<ObservationFrame> frames;
  std::vector<ObjectModel> models;
};

LoadedScene load_for_run(const fs::path& data, const fs::path& dir, const RunConfig& cfg) {
  LoadedScene s;
  s.scene_id = std::stoi(dir.filename().string());
  s.scene = load_scene(dir, cfg.patch_stride);
  for (std::size_t k = 0; k < s.scene.objects.size(); ++k) {
    auto& o = s.scene.objects[k];
    o.model = read_ply(model_path(data, o.model.id()), o.model.id());
    s.frames.push_back(s.scene.frame(k, true));
    s.models.push_back(o.model);
  }
  return s;
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_manifest(const fs::path& out, const std::string& command, const RunConfig& cfg, const Globals& g,
                    const Json& inputs, const Json& outputs) {
  write_json(out / "manifest.json", {{"tool", "pose6d"},
                                     {"command", command},
                                     {"seed", cfg.seed},
                                     {"threads", g.threads},
                                     {"config", to_json(cfg)},
                                     {"inputs", inputs},
                                     {"outputs", outputs}});
}

int cmd_synth(const Globals& g, const RunConfig& cfg) {
  const fs::path out = g.out;
  fs::create_directories(out / "models");
  std::vector<int> ids = cfg.scene.object_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int id : ids) write_ply(model_path(out, id), library_model(id));
  Json scenes = Json::array();
  for (int i = 0; i < cfg.scenes; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    const SyntheticScene s = generate_scene(cfg.scene, seed);
    save_scene(s, out / "scenes" / scene_name(i));
    Json occ = Json::array();
    for (const auto& o : s.objects) occ.push_back(o.occluded_fraction);
    scenes.push_back({{"scene_id", i}, {"seed", seed}, {"occluded_fraction", occ}});
  }
  write_manifest(out, "synth", cfg, g, Json::object(), {{"models", ids}, {"scenes", scenes}});
  return 0;
}

int cmd_render(const Globals& g, const RunConfig& cfg, const fs::path& data, int scene_index) {
  const fs::path dir = data / "scenes" / scene_name(scene_index);
  const LoadedScene s = load_for_run(data, dir, cfg);
  const fs::path out = g.out;
  fs::create_directories(out);
  Json files = Json::array();
  for (std::size_t k = 0; k < s.models.size(); ++k) {
    const RgbXyzMap r = render_pointcloud(s.models[k], s.scene.objects[k].gt, s.scene.camera, cfg.warp);
    RgbImage img(r.width, r.height);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (int c = 0; c < 3; ++c) img.data[i][c] = static_cast<std::uint8_t>(std::lround(255.0 * r.rgb[i][c]));
    const std::string stem = "render_" + std::to_string(k);
    write_png_rgb(out / (stem + ".png"), img);
    write_dten(out / (stem + ".dten"), to_tensor(r));
    files.push_back(stem + ".png");
    files.push_back(stem + ".dten");
  }
  write_manifest(out, "render", cfg, g, {{"scene", dir.string()}}, {{"files", files}});
  return 0;
}

Json hypotheses_json(const std::vector<Hypothesis>& hyps) {
  Json a = Json::array();
  for (const auto& h : hyps) {
    Json e = to_json(h.pose);
    const Eigen::Quaterniond& q = h.pose.rotation().quaternion();
    e["quaternion_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
    e["score"] = h.score;
    a.push_back(e);
  }
  return a;
}

int cmd_propose(const Globals& g, const RunConfig& cfg, const fs::path& data, ThreadPool& pool) {
  const fs::path out = g.out;
  fs::create_directories(out);
  TemplateCache cache;
  Json scenes = Json::array();
  for (const auto& dir : scene_dirs(data)) {
    const LoadedScene s = load_for_run(data, dir, cfg);
    Json objects = Json::array();
    for (std::size_t k = 0; k < s.frames.size(); ++k) {
      Json o{{"obj_id", s.models[k].id()}};
      try {
        const Proposal p = propose(s.frames[k], s.models[k], cache.get(s.models[k], cfg, &pool), cfg);
        std::vector<Hypothesis> hyps;
        for (std::size_t b = 0; b < p.top.size(); ++b)
          hyps.push_back({static_cast<int>(k), static_cast<int>(b), Pose(p.top[b].rotation, p.translation), p.top[b].score});
        o["ok"] = true;
        o["hypotheses_scored"] = p.scored;
        o["hypotheses"] = hypotheses_json(hyps);
      } catch (const std::invalid_argument& e) {
        o["ok"] = false;
        o["error"] = e.what();
        o["hypotheses_scored"] = 0;
        o["hypotheses"] = Json::array();
      }
      objects.push_back(o);
    }
    scenes.push_back({{"scene_id", s.scene_id}, {"objects", objects}});
  }
  write_json(out / "proposals.json", {{"scenes", scenes}});
  write_manifest(out, "propose", cfg, g, {{"data", data.string()}}, {{"files", {"proposals.json"}}});
  return 0;
}

Pose pose_from(const Json& j) {
  const auto t = j.at("t").get<std::vector<double>>();
  if (t.size() != 3) throw std::invalid_argument("proposals: t must have 3 entries");
  const Eigen::Vector3d tv(t[0], t[1], t[2]);
  if (j.contains("quaternion_wxyz")) {
    const auto q = j.at("quaternion_wxyz").get<std::vector<double>>();
    if (q.size() != 4) throw std::invalid_argument("proposals: quaternion_wxyz must have 4 entries");
    return Pose(Rotation::from_quaternion(q[0], q[1], q[2], q[3]), tv);
  }
  const auto r = j.at("R").get<std::vector<double>>();
  if (r.size() != 9) throw std::invalid_argument("proposals: R must have 9 entries");
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
  return Pose(Rotation::from_matrix(m), tv);
}

int run_estimates(const Globals& g, const RunConfig& cfg, const fs::path& data, ThreadPool& pool,
                  const std::optional<fs::path>& proposals, const std::string& command) {
  const fs::path out = g.out;
  fs::create_directories(out);
  std::optional<Json> prop;
  if (proposals) {
    try {
      prop = Json::parse(read_text_file(*proposals));
    } catch (const Json::parse_error& e) {
      throw IoError(IoError::Kind::Malformed, proposals->string(), e.what(), static_cast<std::int64_t>(e.byte));
    }
  }
  TemplateCache cache;
  std::vector<ResultRow> rows;
  Json reports = Json::array();
  for (const auto& dir : scene_dirs(data)) {
    const LoadedScene s = load_for_run(data, dir, cfg);
    EstimateResult r;
    if (prop) {
      std::vector<std::vector<Hypothesis>> init(s.frames.size());
      const Json* sj = nullptr;
      for (const auto& e : prop->at("scenes"))
        if (e.at("scene_id").get<int>() == s.scene_id) sj = &e;
      if (!sj) throw std::invalid_argument("proposals: no entry for scene " + std::to_string(s.scene_id));
      const auto& objs = sj->at("objects");
      if (objs.size() != s.frames.size()) throw std::invalid_argument("proposals: object count mismatch");
      for (std::size_t k = 0; k < objs.size(); ++k) {
        int b = 0;
        for (const auto& h : objs[k].at("hypotheses"))
          init[k].push_back({static_cast<int>(k), b++, pose_from(h), h.at("score").get<double>()});
      }
      r = refine_from(s.frames, s.models, init, cfg, &pool);
    } else {
      r = estimate(s.frames, s.models, cfg, &pool, &cache);
    }
    const auto scene_rows = result_rows(r, s.scene_id);
    rows.insert(rows.end(), scene_rows.begin(), scene_rows.end());
    Json rep = to_json(r);
    rep["scene_id"] = s.scene_id;
    reports.push_back(rep);
    for (const auto& o : r.objects)
      if (!o.ok) std::cerr << "scene " << s.scene_id << " object " << o.object_id << ": " << o.error << "\n";
  }
  write_results_csv(out / "results.csv", rows);
  write_json(out / "report.json", {{"command", command}, {"threads", g.threads}, {"scenes", reports}});
  Json inputs{{"data", data.string()}};
  if (proposals) inputs["proposals"] = proposals->string();
  write_manifest(out, command, cfg, g, inputs, {{"files", {"results.csv", "report.json"}}});
  return 0;
}

int cmd_eval(const Globals& g, const RunConfig& cfg, const fs::path& data, const fs::path& results) {
  const fs::path out = g.out;
  fs::create_directories(out);
  std::vector<SyntheticScene> scenes;
  for (const auto& dir : scene_dirs(data)) {
    const int id = std::stoi(dir.filename().string());
    if (id != static_cast<int>(scenes.size())) throw std::invalid_argument("eval: scene ids must be consecutive from 0");
    scenes.push_back(load_for_run(data, dir, cfg).scene);
  }
  const EvalReport rep = evaluate(read_results_csv(results), scenes, cfg);
  write_json(out / "eval.json", to_json(rep));
  write_manifest(out, "eval", cfg, g, {{"data", data.string()}, {"results", results.string()}},
                 {{"files", {"eval.json"}}});
  std::cout << "ADD-0.1d accuracy: " << rep.add_accuracy << "%  recall: " << rep.recall << "\n";
  return 0;
}

int cmd_bench(const Globals& g, const RunConfig& cfg, ThreadPool& pool) {
  const fs::path out = g.out;
  fs::create_directories(out);
  const BenchRun batched = bench_throughput(cfg, ExecutionMode::Batched, &pool);
  const BenchRun sequential = bench_throughput(cfg, ExecutionMode::Sequential, &pool);
  const double diff = max_pose_difference(batched.result, sequential.result);
  const double speedup = batched.diagnostics.wall_seconds > 0.0
                             ? sequential.diagnostics.wall_seconds / batched.diagnostics.wall_seconds
                             : 0.0;
  write_json(out / "bench.json", {{"threads", g.threads},
                                  {"hardware_threads", std::thread::hardware_concurrency()},
                                  {"batched", to_json(batched, g.threads)},
                                  {"sequential", to_json(sequential, g.threads)},
                                  {"speedup", speedup},
                                  {"max_pose_difference", diff}});
  write_manifest(out, "bench", cfg, g, Json::object(), {{"files", {"bench.json"}}});
  std::cout << "batched " << batched.diagnostics.wall_seconds << " s, sequential "
            << sequential.diagnostics.wall_seconds << " s, speedup " << speedup << ", max pose difference " << diff
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pose6d: mask-aware pose proposal and batched render-and-compare refinement"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", g.out, "output directory");

  std::string data, results, proposals;
  int scene_index = 0;
  int scenes = 0;
  double occlusion = -1.0;

  auto* synth = app.add_subcommand("synth", "generate synthetic scenes and models");
  synth->add_option("--scenes", scenes, "number of scenes (overrides the config)");
  synth->add_option("--occlusion", occlusion, "occluded fraction per object (overrides the config)");
  auto* render = app.add_subcommand("render", "render the ground-truth poses of a scene");
  render->add_option("--data", data, "dataset directory")->required();
  render->add_option("--scene", scene_index, "scene index");
  auto* propose_cmd = app.add_subcommand("propose", "mask-aware pose proposals");
  propose_cmd->add_option("--data", data, "dataset directory")->required();
  auto* refine = app.add_subcommand("refine", "refine proposals");
  refine->add_option("--data", data, "dataset directory")->required();
  refine->add_option("--proposals", proposals, "proposals.json from propose")->required()->check(CLI::ExistingFile);
  auto* estimate_cmd = app.add_subcommand("estimate", "proposal, refinement and selection");
  estimate_cmd->add_option("--data", data, "dataset directory")->required();
  auto* eval = app.add_subcommand("eval", "score results against ground truth");
  eval->add_option("--data", data, "dataset directory")->required();
  eval->add_option("--results", results, "results.csv")->required()->check(CLI::ExistingFile);
  app.add_subcommand("bench", "batched vs sequential refinement throughput");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (g.out.empty()) throw std::invalid_argument("--out is required");
    RunConfig cfg = resolve_config(g);
    if (*synth) {
      if (scenes > 0) cfg.scenes = scenes;
      if (occlusion >= 0.0) cfg.scene.occlusion_fraction = occlusion;
      cfg.validate();
      return cmd_synth(g, cfg);
    }
    ThreadPool pool(g.threads);
    if (*render) return cmd_render(g, cfg, data, scene_index);
    if (*propose_cmd) return cmd_propose(g, cfg, data, pool);
    if (*refine) return run_estimates(g, cfg, data, pool, fs::path(proposals), "refine");
    if (*estimate_cmd) return run_estimates(g, cfg, data, pool, std::nullopt, "estimate");
    if (*eval) return cmd_eval(g, cfg, data, results);
    return cmd_bench(g, cfg, pool);
  } catch (const IoError& e) {
    std::cerr << "pose6d: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pose6d: " << e.what() << "\n";
    return 1;
  }
}
