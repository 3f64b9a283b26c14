#include "pose6d/image.hpp"

#include <algorithm>

namespace pose6d {

std::size_t count_true(const BinaryMask& m) {
  return static_cast<std::size_t>(std::count_if(m.data.begin(), m.data.end(), [](std::uint8_t b) { return b != 0; }));
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b.width, b.height)) throw std::invalid_argument("mask_union: shape mismatch");
  BinaryMask out(a.width, a.height);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = (a.data[i] != 0 || b.data[i] != 0) ? 1 : 0;
  return out;
}

BinaryMask dilate(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  BinaryMask out(m.width, m.height);
  for (int v = 0; v < m.height; ++v) {
    for (int u = 0; u < m.width; ++u) {
      if (!m.at(u, v)) continue;
      for (int dv = -radius; dv <= radius; ++dv) {
        for (int du = -radius; du <= radius; ++du) {
          if (m.contains(u + du, v + dv)) out.at(u + du, v + dv) = 1;
        }
      }
    }
  }
  return out;
}

PixelBox tight_bbox(const BinaryMask& m) {
  PixelBox b{m.width, m.height, -1, -1};
  for (int v = 0; v < m.height; ++v) {
    for (int u = 0; u < m.width; ++u) {
      if (!m.at(u, v)) continue;
      b.u_min = std::min(b.u_min, u);
      b.v_min = std::min(b.v_min, v);
      b.u_max = std::max(b.u_max, u);
      b.v_max = std::max(b.v_max, v);
    }
  }
  if (b.u_max < 0) return PixelBox{};
  return b;
}

RgbXyzMap::RgbXyzMap(int w, int h)
    : width(w),
      height(h),
      rgb(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero()),
      xyz(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero()),
      valid(static_cast<std::size_t>(w) * h, 0) {
  if (w < 0 || h < 0) throw std::invalid_argument("rgbxyz: negative dimensions");
}

std::size_t RgbXyzMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

void RgbXyzMap::set(std::size_t i, const Eigen::Vector3d& color, const Eigen::Vector3d& point) {
  rgb[i] = color;
  xyz[i] = point;
  valid[i] = 1;
}

BinaryMask RgbXyzMap::valid_mask() const {
  BinaryMask m(width, height);
  m.data = valid;
  return m;
}

}  // namespace pose6d
