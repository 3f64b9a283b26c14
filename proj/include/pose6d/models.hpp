#pragma once

#include "pose6d/sampler.hpp"

#include <string>
#include <vector>

namespace pose6d {

enum class Shape { Cube, Sphere, LPrism, Box, Cylinder };

const char* to_string(Shape s);
/// Throws std::invalid_argument for an unknown name.
Shape shape_from_string(const std::string& name);

/// Procedural surface point cloud centred on its bounding box, scaled so the
/// bounding-box diagonal equals `diameter`, sampled at about diameter / 70.
/// Colors encode the normalized bounding-box coordinate of each point.
ObjectModel make_shape(Shape shape, int id, double diameter);

struct LibraryEntry {
  int id;
  Shape shape;
  double diameter;
};

/// Five objects, ids 1..5: cube, sphere, L-prism, box, cylinder.
const std::vector<LibraryEntry>& default_library();

/// Builds the library model with the given id. Throws std::invalid_argument
/// for an unknown id.
ObjectModel library_model(int id);

}  // namespace pose6d
