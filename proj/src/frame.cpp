#include "pose6d/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace pose6d {

void ObservationFrame::validate() const {
  const int w = camera.width(), h = camera.height();
  if (!rgb.same_shape(w, h)) throw std::invalid_argument("frame: rgb shape differs from camera");
  if (!depth.same_shape(w, h)) throw std::invalid_argument("frame: depth shape differs from camera");
  if (!visible.same_shape(w, h)) throw std::invalid_argument("frame: visible mask shape differs from camera");
  if (occlusion && !occlusion->same_shape(w, h))
    throw std::invalid_argument("frame: occlusion mask shape differs from camera");
  for (double d : depth.data) {
    if (!std::isfinite(d) || d < 0.0) throw std::invalid_argument("frame: depth must be finite and >= 0");
  }
  if (features) features->validate();
}

}  // namespace pose6d
