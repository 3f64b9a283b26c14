#include "doctest.h"
#include "pose6d/geom.hpp"
#include "support/oracles.hpp"

#include <numbers>
#include <random>
#include <stdexcept>

using namespace pose6d;
using oracle::Mat3;
using oracle::Vec3;

namespace {

Mat3 matrix_of(const Rotation& r) {
  const auto& q = r.quaternion();
  return oracle::quat_to_matrix(q.w(), q.x(), q.y(), q.z());
}

Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Pose(Rotation::exp(oracle::random_axis_angle(rng, 3.1)), Vec3(u(rng), u(rng), u(rng)));
}

}  // namespace

TEST_CASE("rotation stays unit and canonical") {
  const Rotation r = Rotation::from_quaternion(-2.0, 0.0, 0.0, 2.0);
  CHECK(r.quaternion().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.quaternion().w() >= 0.0);
  const Rotation z = Rotation::from_quaternion(0.0, 0.0, -1.0, 0.0);
  CHECK(z.quaternion().y() == doctest::Approx(1.0));
  const Rotation again = Rotation::from_quaternion(r.quaternion());
  CHECK(again.quaternion().coeffs() == r.quaternion().coeffs());
  CHECK_THROWS_AS(Rotation::from_quaternion(0, 0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Rotation::from_quaternion(NAN, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("compose examples") {
  std::mt19937_64 rng(1);
  const Pose p = random_pose(rng);
  const Pose q = compose(Pose::identity(), p);
  CHECK(angular_distance(q.rotation(), p.rotation()) < 1e-12);
  CHECK((q.translation() - p.translation()).norm() < 1e-15);

  const Pose tts = compose(Pose::translate(0, 0, 1), inverse(Pose::identity()));
  CHECK((tts.translation() - Vec3(0, 0, 1)).norm() == 0.0);
  CHECK(tts.rotation().angle() == 0.0);

  const Pose z90(Rotation::about_z(std::numbers::pi / 2), Vec3::Zero());
  const Pose z180 = compose(z90, z90);
  const auto& quat = z180.rotation().quaternion();
  CHECK(std::abs(quat.w()) < 1e-12);
  CHECK(quat.z() == doctest::Approx(1.0));
  const Mat3 oracle_m = oracle::rot_z(std::numbers::pi / 2) * oracle::rot_z(std::numbers::pi / 2);
  CHECK((matrix_of(z180.rotation()) - oracle_m).norm() < 1e-12);
}

TEST_CASE("compose matches matrix products and is associative") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Eigen::Matrix4d m = oracle::homogeneous(matrix_of(a.rotation()), a.translation()) *
                              oracle::homogeneous(matrix_of(b.rotation()), b.translation());
    const Pose ab = compose(a, b);
    CHECK((matrix_of(ab.rotation()) - m.topLeftCorner<3, 3>()).norm() < 1e-12);
    CHECK((ab.translation() - m.topRightCorner<3, 1>()).norm() < 1e-12);
    const Pose l = compose(compose(a, b), c), r = compose(a, compose(b, c));
    CHECK(angular_distance(l.rotation(), r.rotation()) < 1e-9);
    CHECK((l.translation() - r.translation()).norm() < 1e-9);
    CHECK(ab.rotation().quaternion().norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("inverse") {
  CHECK(inverse(Pose::identity()).translation().norm() == 0.0);
  CHECK((inverse(Pose::translate(1, 2, 3)).translation() - Vec3(-1, -2, -3)).norm() == 0.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const Pose p = random_pose(rng);
    const Pose id = compose(inverse(p), p);
    CHECK(id.rotation().angle() < 1e-9);
    CHECK(id.translation().norm() < 1e-9);
    const Eigen::Matrix4d inv = oracle::homogeneous(matrix_of(p.rotation()), p.translation()).inverse();
    const Pose ip = inverse(p);
    CHECK((matrix_of(ip.rotation()) - inv.topLeftCorner<3, 3>()).norm() < 1e-9);
    CHECK((ip.translation() - inv.topRightCorner<3, 1>()).norm() < 1e-9);
  }
}

TEST_CASE("exp_update") {
  const Pose z = exp_update({});
  CHECK(z.rotation().angle() == 0.0);
  CHECK(z.translation().norm() == 0.0);

  TangentUpdate q;
  q.rotation = Vec3(0, 0, std::numbers::pi / 2);
  q.translation = Vec3(0.1, 0.2, 0.3);
  const Pose p = exp_update(q);
  CHECK((matrix_of(p.rotation()) - oracle::rot_z(std::numbers::pi / 2)).norm() < 1e-12);
  CHECK(p.translation() == q.translation);

  std::mt19937_64 rng(4);
  for (int k = 0; k < 500; ++k) {
    TangentUpdate u;
    u.rotation = oracle::random_axis_angle(rng, 0.5);
    const Pose e = exp_update(u);
    CHECK(std::abs(e.rotation().angle() - u.rotation.norm()) < 1e-9);
    CHECK((matrix_of(e.rotation()) - oracle::rodrigues(u.rotation)).norm() < 1e-12);
  }
  for (double eps : {1e-3, 1e-5, 1e-8, 1e-12}) {
    TangentUpdate u;
    u.rotation = Vec3(0.3, -0.4, 1.2) * eps;
    CHECK(std::abs(exp_update(u).rotation().angle() - u.rotation.norm()) < 1e-12);
  }

  TangentUpdate bad;
  bad.rotation = Vec3(std::numbers::pi, 0, 0);
  CHECK_THROWS_AS(exp_update(bad), std::domain_error);
  bad.rotation = Vec3(NAN, 0, 0);
  CHECK_THROWS_AS(exp_update(bad), std::domain_error);
}

TEST_CASE("rotation log inverts exp") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const Vec3 w = oracle::random_axis_angle(rng, 3.0);
    CHECK((Rotation::exp(w).log() - w).norm() < 1e-9);
  }
}

TEST_CASE("camera projection") {
  const CameraModel cam(100, 100, 64, 64, 128, 128);
  auto uv = cam.project(Vec3(0, 0, 1));
  REQUIRE(uv);
  CHECK(uv->x() == 64.0);
  CHECK(uv->y() == 64.0);
  uv = cam.project(Vec3(1, 0, 2));
  REQUIRE(uv);
  CHECK(uv->x() == 114.0);
  CHECK(uv->y() == 64.0);
  CHECK_FALSE(cam.project(Vec3(0, 0, -1)));
  CHECK_FALSE(cam.project(Vec3(1, 1, 0)));

  CHECK((cam.backproject(64, 64, 2.0) - Vec3(0, 0, 2.0)).norm() == 0.0);
  CHECK((cam.backproject(10, 10, 2.0) - Vec3(-1.08, -1.08, 2.0)).norm() < 1e-12);
  CHECK_THROWS_AS(cam.backproject(1, 1, 0.0), std::invalid_argument);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 128), z(0.1, 10);
  for (int k = 0; k < 1000; ++k) {
    const double pu = u(rng), pv = u(rng);
    const auto back = cam.project(cam.backproject(pu, pv, z(rng)));
    REQUIRE(back);
    CHECK(std::hypot(back->x() - pu, back->y() - pv) < 1e-6);
  }
  CHECK_THROWS_AS(CameraModel(0, 1, 0, 0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(CameraModel(1, 1, 0, 0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(CameraModel(1, 1, 0, 0, 1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("pose rejects non-finite translation") {
  CHECK_THROWS_AS(Pose(Rotation{}, Vec3(INFINITY, 0, 0)), std::invalid_argument);
}
