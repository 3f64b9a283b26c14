#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pose6d {

/// Row-major raster. Pixel (u, v) is column u, row v.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w < 0 || h < 0) throw std::invalid_argument("image: negative dimensions");
  }

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  T& at(int u, int v) { return data[index(u, v)]; }
  const T& at(int u, int v) const { return data[index(u, v)]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(int w, int h) const { return width == w && height == h; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// 0 = false, anything else = true.
using BinaryMask = Image<std::uint8_t>;
/// Meters; 0 marks invalid depth.
using DepthMap = Image<double>;
using Rgb8 = std::array<std::uint8_t, 3>;
using RgbImage = Image<Rgb8>;
using ProbabilityMap = Image<double>;

std::size_t count_true(const BinaryMask& m);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
/// Square-kernel binary dilation by `radius` pixels.
BinaryMask dilate(const BinaryMask& m, int radius);

/// Inclusive integer pixel bounds of the true pixels of a mask.
struct PixelBox {
  int u_min = 0, v_min = 0, u_max = -1, v_max = -1;
  bool empty() const { return u_max < u_min || v_max < v_min; }
  Eigen::Vector2d center() const { return {0.5 * (u_min + u_max), 0.5 * (v_min + v_max)}; }
};
PixelBox tight_bbox(const BinaryMask& m);

/// Per-pixel (r, g, b, x, y, z, valid). RGB in [0, 1]; XYZ in meters in a
/// camera frame. Invalid pixels carry an all-zero payload.
struct RgbXyzMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> rgb;
  std::vector<Eigen::Vector3d> xyz;
  std::vector<std::uint8_t> valid;

  RgbXyzMap() = default;
  RgbXyzMap(int w, int h);

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  std::size_t size() const { return valid.size(); }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
  std::size_t valid_count() const;
  void set(std::size_t i, const Eigen::Vector3d& color, const Eigen::Vector3d& point);
  BinaryMask valid_mask() const;

  friend bool operator==(const RgbXyzMap&, const RgbXyzMap&) = default;
};

}  // namespace pose6d
