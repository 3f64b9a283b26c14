#include "doctest.h"
#include "pose6d/sampler.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

#include <numbers>
#include <set>
#include <stdexcept>

using namespace pose6d;
using oracle::Vec3;

TEST_CASE("icosphere vertex counts follow 10*4^L + 2") {
  for (int level = 0; level <= 3; ++level) {
    const auto v = icosphere_vertices(level);
    CHECK(v.size() == static_cast<std::size_t>(10 * (1 << (2 * level)) + 2));
    for (const auto& p : v) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sample_viewpoints") {
  SamplerConfig cfg;
  cfg.subdivision_level = 0;
  CHECK(sample_viewpoints(cfg).size() == 12);
  cfg.subdivision_level = 1;
  const auto views = sample_viewpoints(cfg);
  REQUIRE(views.size() == 42);
  const auto verts = icosphere_vertices(1);
  for (std::size_t i = 0; i < views.size(); ++i) {
    CHECK(views[i].quaternion().norm() == doctest::Approx(1.0).epsilon(1e-12));
    // The optical axis in the object frame points from the viewpoint to the origin.
    const Vec3 axis = views[i].inverse() * Vec3::UnitZ();
    CHECK((axis + verts[i]).norm() < 1e-9);
    for (std::size_t j = 0; j < i; ++j) CHECK(angular_distance(views[i], views[j]) > 1e-3);
  }
  // Deterministic order.
  const auto again = sample_viewpoints(cfg);
  for (std::size_t i = 0; i < views.size(); ++i)
    CHECK(views[i].quaternion().coeffs() == again[i].quaternion().coeffs());
}

TEST_CASE("filter_visible") {
  const ObjectModel m = testmodels::cube(0.05, 6);
  SamplerConfig cfg;
  cfg.subdivision_level = 0;
  const auto views = sample_viewpoints(cfg);
  CHECK(filter_visible(views, m, cfg).size() == views.size());
  cfg.visibility_sigma = -1e9;
  CHECK(filter_visible(views, m, cfg).size() == views.size());

  cfg.visibility_sigma = 0.0;
  const auto kept = filter_visible(views, m, cfg);
  const auto verts = icosphere_vertices(0);
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < views.size(); ++i) {
    // e_z . t(R) with t(R) = -alpha D R^T e_z and R^T e_z = -v.
    const double ez_t = cfg.depth_alpha * m.diameter() * verts[i].z();
    if (ez_t >= 0.0) expected.push_back(i);
  }
  REQUIRE(kept.size() == expected.size());
  CHECK(kept.size() < views.size());
  for (std::size_t k = 0; k < kept.size(); ++k)
    CHECK(kept[k].quaternion().coeffs() == views[expected[k]].quaternion().coeffs());
}

TEST_CASE("augment_in_plane") {
  SamplerConfig cfg;
  const auto views = sample_viewpoints(cfg);
  const auto hyps = augment_in_plane(views, cfg);
  CHECK(hyps.size() == 252);

  SamplerConfig one;
  one.in_plane_step = 2 * std::numbers::pi;
  const std::vector<Rotation> single{views[3]};
  const auto h1 = augment_in_plane(single, one);
  REQUIRE(h1.size() == 1);
  CHECK(angular_distance(h1[0], views[3]) < 1e-12);

  SamplerConfig quarter;
  quarter.subdivision_level = 0;
  quarter.in_plane_step = std::numbers::pi / 2;
  const auto h48 = augment_in_plane(sample_viewpoints(quarter), quarter);
  REQUIRE(h48.size() == 48);
  for (std::size_t i = 0; i < h48.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) CHECK(angular_distance(h48[i], h48[j]) > 1e-6);

  // View-major, angle ascending, rolling about the optical axis.
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (int k = 0; k < 6; ++k) {
      const Rotation& r = hyps[v * 6 + k];
      CHECK(angular_distance(r * views[v].inverse(), Rotation::about_z(k * std::numbers::pi / 3)) < 1e-9);
    }
  }

  SamplerConfig bad;
  bad.in_plane_step = 1.0;
  CHECK_THROWS_AS(augment_in_plane(views, bad), std::invalid_argument);
}

TEST_CASE("template_pose") {
  std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {0.1, 0, 0}, {0.05, 0.01, 0}, {0.05, 0, 0.01}};
  std::vector<std::array<std::uint8_t, 3>> cols(4, {0, 0, 0});
  const ObjectModel m = ObjectModel::create(1, pts, cols);
  CHECK(m.diameter() == doctest::Approx(0.1).epsilon(1e-12));
  SamplerConfig cfg;
  const Pose p = template_pose(Rotation(), m, cfg);
  CHECK((p.translation() - Vec3(0, 0, 1.0)).norm() < 1e-12);
  pts[1] = {0.2, 0, 0};
  const ObjectModel m2 = ObjectModel::create(2, pts, cols);
  CHECK((template_pose(Rotation(), m2, cfg).translation() - Vec3(0, 0, 2.0)).norm() < 1e-12);

  // A centered object of unit diameter at the canonical pose fits the default camera.
  const ObjectModel unit = testmodels::cube(0.5 / std::sqrt(3.0), 10);
  CHECK(unit.diameter() == doctest::Approx(1.0).epsilon(1e-9));
  const CameraModel cam(572.4, 573.6, 325.3, 242.0, 640, 480);
  for (const auto& view : sample_viewpoints(cfg)) {
    const Pose tp = template_pose(view, unit, cfg);
    for (const auto& x : unit.points()) {
      const auto uv = cam.project(tp * x);
      REQUIRE(uv);
      CHECK((uv->x() >= 0 && uv->x() <= 639 && uv->y() >= 0 && uv->y() <= 479));
    }
  }
}

TEST_CASE("object model validation") {
  std::vector<Eigen::Vector3d> flat{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  std::vector<std::array<std::uint8_t, 3>> cols(4, {0, 0, 0});
  CHECK_THROWS_AS(ObjectModel::create(1, flat, cols), std::invalid_argument);
  CHECK_THROWS_AS(ObjectModel::create(1, {flat.begin(), flat.begin() + 3}, {cols.begin(), cols.begin() + 3}),
                  std::invalid_argument);
  std::mt19937_64 rng(9);
  std::vector<Eigen::Vector3d> pts;
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 300; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  double brute = 0;
  for (auto& a : pts)
    for (auto& b : pts) brute = std::max(brute, (a - b).norm());
  CHECK(std::abs(point_set_diameter(pts) - brute) < 1e-12);
}

TEST_CASE("sampler config validation") {
  SamplerConfig c;
  c.subdivision_level = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.depth_alpha = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.in_plane_step = 7.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
