#include "pose6d/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pose6d {

namespace {

constexpr double kSamplesPerDiameter = 70.0;

using Vec3 = Eigen::Vector3d;

ObjectModel finish(int id, std::vector<Vec3> pts) {
  Vec3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 mid = 0.5 * (lo + hi);
  const Vec3 extent = (hi - lo).cwiseMax(1e-12);
  std::vector<std::array<std::uint8_t, 3>> colors;
  colors.reserve(pts.size());
  for (auto& p : pts) {
    std::array<std::uint8_t, 3> c{};
    for (int a = 0; a < 3; ++a) c[a] = static_cast<std::uint8_t>(std::lround(255.0 * (p[a] - lo[a]) / extent[a]));
    colors.push_back(c);
    p -= mid;
  }
  return ObjectModel::create(id, std::move(pts), std::move(colors));
}

// Lattice points of the solid that have a lattice neighbour outside it.
template <typename Inside>
std::vector<Vec3> lattice_surface(const Vec3& size, double spacing, Inside inside) {
  Eigen::Vector3i n;
  for (int a = 0; a < 3; ++a) n[a] = std::max(2, static_cast<int>(std::lround(size[a] / spacing)) + 1);
  auto in = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= n[0] || j >= n[1] || k >= n[2]) return false;
    return inside(i, j, k, n);
  };
  std::vector<Vec3> pts;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k) {
        if (!in(i, j, k)) continue;
        if (in(i - 1, j, k) && in(i + 1, j, k) && in(i, j - 1, k) && in(i, j + 1, k) && in(i, j, k - 1) &&
            in(i, j, k + 1))
          continue;
        pts.emplace_back(size.x() * i / (n[0] - 1), size.y() * j / (n[1] - 1), size.z() * k / (n[2] - 1));
      }
  return pts;
}

std::vector<Vec3> box_points(const Vec3& size, double spacing) {
  return lattice_surface(size, spacing, [](int, int, int, const Eigen::Vector3i&) { return true; });
}

std::vector<Vec3> lprism_points(const Vec3& size, double spacing) {
  return lattice_surface(size, spacing, [](int i, int j, int, const Eigen::Vector3i& n) {
    return !(2 * i > n[0] && 2 * j > n[1]);
  });
}

std::vector<Vec3> sphere_points(double r, double spacing) {
  const int count = static_cast<int>(std::ceil(4.0 * std::numbers::pi * r * r / (spacing * spacing)));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts.emplace_back(r * rho * std::cos(phi), r * rho * std::sin(phi), r * z);
  }
  return pts;
}

std::vector<Vec3> cylinder_points(double r, double h, double spacing) {
  std::vector<Vec3> pts;
  const int around = std::max(8, static_cast<int>(std::lround(2.0 * std::numbers::pi * r / spacing)));
  const int levels = std::max(2, static_cast<int>(std::lround(h / spacing)) + 1);
  for (int l = 0; l < levels; ++l) {
    const double z = -0.5 * h + h * l / (levels - 1);
    for (int a = 0; a < around; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / around;
      pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  const int rings = static_cast<int>(std::lround(r / spacing));
  for (double z : {-0.5 * h, 0.5 * h}) {
    pts.emplace_back(0.0, 0.0, z);
    for (int q = 1; q < rings; ++q) {
      const double rq = r * q / rings;
      const int m = std::max(6, static_cast<int>(std::lround(2.0 * std::numbers::pi * rq / spacing)));
      for (int a = 0; a < m; ++a) {
        const double phi = 2.0 * std::numbers::pi * a / m;
        pts.emplace_back(rq * std::cos(phi), rq * std::sin(phi), z);
      }
    }
  }
  return pts;
}

}  // namespace

const char* to_string(Shape s) {
  switch (s) {
    case Shape::Cube: return "cube";
    case Shape::Sphere: return "sphere";
    case Shape::LPrism: return "l_prism";
    case Shape::Box: return "box";
    case Shape::Cylinder: return "cylinder";
  }
  return "unknown";
}

Shape shape_from_string(const std::string& name) {
  for (Shape s : {Shape::Cube, Shape::Sphere, Shape::LPrism, Shape::Box, Shape::Cylinder})
    if (name == to_string(s)) return s;
  throw std::invalid_argument("unknown shape \"" + name + "\"");
}

ObjectModel make_shape(Shape shape, int id, double diameter) {
  if (!(diameter > 0.0) || !std::isfinite(diameter)) throw std::invalid_argument("make_shape: diameter must be > 0");
  const double s = diameter / kSamplesPerDiameter;
  switch (shape) {
    case Shape::Cube: {
      const double a = diameter / std::sqrt(3.0);
      return finish(id, box_points(Vec3(a, a, a), s));
    }
    case Shape::Sphere: return finish(id, sphere_points(0.5 * diameter, s));
    case Shape::LPrism: {
      const Vec3 size = Vec3(1.0, 1.0, 0.5) * (diameter / 1.5);
      return finish(id, lprism_points(size, s));
    }
    case Shape::Box: {
      const Vec3 ratio(1.0, 0.6, 0.4);
      return finish(id, box_points(ratio * (diameter / ratio.norm()), s));
    }
    case Shape::Cylinder: {
      // height = 1.2 x diameter of the base
      const double r = 0.5 * diameter / std::sqrt(1.0 + 1.44);
      return finish(id, cylinder_points(r, 2.4 * r, s));
    }
  }
  throw std::invalid_argument("make_shape: unknown shape");
}

const std::vector<LibraryEntry>& default_library() {
  static const std::vector<LibraryEntry> lib{{1, Shape::Cube, 0.12},
                                             {2, Shape::Sphere, 0.10},
                                             {3, Shape::LPrism, 0.13},
                                             {4, Shape::Box, 0.12},
                                             {5, Shape::Cylinder, 0.11}};
  return lib;
}

ObjectModel library_model(int id) {
  for (const auto& e : default_library())
    if (e.id == id) return make_shape(e.shape, e.id, e.diameter);
  throw std::invalid_argument("no library model with id " + std::to_string(id));
}

}  // namespace pose6d
