#include "pose6d/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pose6d {

void WarpConfig::validate() const {
  if (splat_radius < 0 || splat_radius > 1) throw std::invalid_argument("warp: splat_radius must be 0 or 1");
  if (!(depth_tie_epsilon > 0.0)) throw std::invalid_argument("warp: depth_tie_epsilon must be positive");
}

namespace {

struct Projected {
  int u, v;  // rounded pixel; u = INT_MIN marks behind-camera
  double z;
};

constexpr int kBehind = std::numeric_limits<int>::min();

template <typename Fn>
void for_footprint(const Projected& p, int radius, int width, int height, Fn&& fn) {
  for (int v = std::max(p.v - radius, 0); v <= std::min(p.v + radius, height - 1); ++v) {
    for (int u = std::max(p.u - radius, 0); u <= std::min(p.u + radius, width - 1); ++u) {
      fn(static_cast<std::size_t>(v) * width + u);
    }
  }
}

}  // namespace

RgbXyzMap splat(std::span<const SplatSample> samples, const CameraModel& cam, const WarpConfig& cfg,
                ThreadPool* pool) {
  cfg.validate();
  const int w = cam.width(), h = cam.height();
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  const std::size_t n = samples.size();
  const std::size_t chunks = pool ? std::max<std::size_t>(1, std::min<std::size_t>(pool->size(), n)) : 1;
  const auto chunk_range = [&](std::size_t c) {
    return std::pair{n * c / chunks, n * (c + 1) / chunks};
  };

  std::vector<Projected> proj(n);
  run_indexed(pool, chunks, [&](std::size_t c) {
    const auto [lo, hi] = chunk_range(c);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto uv = cam.project(samples[i].xyz);
      if (!uv || !std::isfinite(uv->x()) || !std::isfinite(uv->y()) || std::abs(uv->x()) > 1e9 ||
          std::abs(uv->y()) > 1e9) {
        proj[i] = {kBehind, 0, 0.0};
        continue;
      }
      proj[i] = {static_cast<int>(std::floor(uv->x() + 0.5)), static_cast<int>(std::floor(uv->y() + 0.5)),
                 samples[i].xyz.z()};
    }
  });

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t none = std::numeric_limits<std::size_t>::max();

  // Pass 1: per-pixel minimum depth.
  std::vector<std::vector<double>> zbuf(chunks, std::vector<double>(pixels, inf));
  run_indexed(pool, chunks, [&](std::size_t c) {
    auto& buf = zbuf[c];
    const auto [lo, hi] = chunk_range(c);
    for (std::size_t i = lo; i < hi; ++i) {
      if (proj[i].u == kBehind) continue;
      for_footprint(proj[i], cfg.splat_radius, w, h, [&](std::size_t px) { buf[px] = std::min(buf[px], proj[i].z); });
    }
  });
  for (std::size_t c = 1; c < chunks; ++c)
    for (std::size_t px = 0; px < pixels; ++px) zbuf[0][px] = std::min(zbuf[0][px], zbuf[c][px]);
  const auto& zmin = zbuf[0];

  // Pass 2: lowest sample index within the tie band.
  std::vector<std::vector<std::size_t>> winner(chunks, std::vector<std::size_t>(pixels, none));
  run_indexed(pool, chunks, [&](std::size_t c) {
    auto& buf = winner[c];
    const auto [lo, hi] = chunk_range(c);
    for (std::size_t i = lo; i < hi; ++i) {
      if (proj[i].u == kBehind) continue;
      for_footprint(proj[i], cfg.splat_radius, w, h, [&](std::size_t px) {
        if (proj[i].z <= zmin[px] + cfg.depth_tie_epsilon && i < buf[px]) buf[px] = i;
      });
    }
  });

  RgbXyzMap out(w, h);
  for (std::size_t px = 0; px < pixels; ++px) {
    std::size_t best = none;
    for (std::size_t c = 0; c < chunks; ++c) best = std::min(best, winner[c][px]);
    if (best != none) out.set(px, samples[best].rgb, samples[best].xyz);
  }
  return out;
}

RgbXyzMap reproject(const RgbXyzMap& src, const Pose& src_pose, const Pose& dst_pose, const CameraModel& dst_cam,
                    const WarpConfig& cfg, ThreadPool* pool) {
  const Pose rel = compose(dst_pose, inverse(src_pose));
  const Eigen::Matrix3d r = rel.rotation().matrix();
  const Eigen::Vector3d& t = rel.translation();
  std::vector<SplatSample> samples;
  samples.reserve(src.valid_count());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!src.is_valid(i)) continue;
    samples.push_back({src.rgb[i], r * src.xyz[i] + t});
  }
  return splat(samples, dst_cam, cfg, pool);
}

RgbXyzMap render_pointcloud(const ObjectModel& model, const Pose& pose, const CameraModel& cam,
                            const WarpConfig& cfg, ThreadPool* pool) {
  if (model.size() == 0) throw std::invalid_argument("render_pointcloud: empty model");
  const Eigen::Matrix3d r = pose.rotation().matrix();
  const Eigen::Vector3d& t = pose.translation();
  std::vector<SplatSample> samples(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& c = model.colors()[i];
    samples[i] = {Eigen::Vector3d(c[0], c[1], c[2]) / 255.0, r * model.points()[i] + t};
  }
  return splat(samples, cam, cfg, pool);
}

RgbXyzMap to_object_frame(const RgbXyzMap& map, const Pose& pose) {
  const Pose inv = inverse(pose);
  const Eigen::Matrix3d r = inv.rotation().matrix();
  RgbXyzMap out = map;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.is_valid(i)) out.xyz[i] = r * map.xyz[i] + inv.translation();
  }
  return out;
}

RoundtripResidual warp_roundtrip_residual(const RgbXyzMap& src, const Pose& delta, const CameraModel& cam,
                                          const WarpConfig& cfg) {
  const RgbXyzMap forward = reproject(src, Pose::identity(), delta, cam, cfg);
  const RgbXyzMap back = reproject(forward, delta, Pose::identity(), cam, cfg);
  RoundtripResidual out;
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size() && i < back.size(); ++i) {
    if (!src.is_valid(i) || !back.is_valid(i)) continue;
    const double d = (back.xyz[i] - src.xyz[i]).norm();
    out.residuals.push_back(d);
    sum += d;
  }
  out.survivors = out.residuals.size();
  const std::size_t total = src.valid_count();
  out.survival_fraction = total ? static_cast<double>(out.survivors) / total : 0.0;
  out.mean = out.survivors ? sum / out.survivors : 0.0;
  return out;
}

}  // namespace pose6d
