#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"

#include <cstddef>
#include <vector>

namespace pose6d {

/// Patch layout over an image: patch (r, c) covers pixels
/// [c*stride, (c+1)*stride) x [r*stride, (r+1)*stride), clipped to the image.
struct PatchGrid {
  int rows = 0;
  int cols = 0;
  int stride = 1;

  static PatchGrid covering(int width, int height, int stride);
  int size() const { return rows * cols; }
  /// Integer pixel at the patch center (c*stride + stride/2, r*stride + stride/2).
  Eigen::Vector2i center_pixel(int patch) const;
  bool matches_image(int width, int height) const;

  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

/// Dense C-channel features on a patch grid, row-major (patch-major then
/// channel).
struct FeatureMap {
  PatchGrid grid;
  int channels = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(PatchGrid g, int c);

  const float* at(int patch) const { return data.data() + static_cast<std::size_t>(patch) * channels; }
  float* at(int patch) { return data.data() + static_cast<std::size_t>(patch) * channels; }

  /// Throws std::invalid_argument on empty grids, C < 1, size mismatch or
  /// non-finite entries.
  void validate() const;
};

/// Majority vote per patch over the in-image pixels; ties count as true.
BinaryMask downsample_mask(const BinaryMask& mask, const PatchGrid& grid);

/// S(i, j) = mq(i) * mr(j) * <fq(i), fr(j)>. Only rows/columns whose patch
/// mask is set are stored; every other entry is exactly zero.
class SimilarityMatrix {
 public:
  SimilarityMatrix(int query_patches, int reference_patches, std::vector<int> active_rows,
                   std::vector<int> active_cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int i, int j) const;

  const std::vector<int>& active_rows() const { return active_rows_; }
  const std::vector<int>& active_cols() const { return active_cols_; }
  /// Compact storage: value for (active_rows[a], active_cols[b]).
  double compact(std::size_t a, std::size_t b) const { return values_[a * active_cols_.size() + b]; }
  double& compact(std::size_t a, std::size_t b) { return values_[a * active_cols_.size() + b]; }

 private:
  int rows_, cols_;
  std::vector<int> active_rows_, active_cols_;
  std::vector<int> row_slot_, col_slot_;
  std::vector<double> values_;
};

/// Throws std::invalid_argument on channel mismatch or masks whose size does
/// not match the feature grid's image.
SimilarityMatrix masked_similarity(const FeatureMap& fq, const BinaryMask& mq, const FeatureMap& fr,
                                   const BinaryMask& mr);

struct PatchMatch {
  int query;
  int reference;
  double weight;
  friend bool operator==(const PatchMatch&, const PatchMatch&) = default;
};

/// Row-wise argmax (lowest column on ties); rows without a positive entry
/// are dropped.
std::vector<PatchMatch> assign_nn(const SimilarityMatrix& s);

struct Correspondence {
  Eigen::Vector3d query;      ///< Q_i, query camera frame
  Eigen::Vector3d reference;  ///< P_i, object frame
  double weight;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  double total_weight() const;
  bool usable() const { return total_weight() > 0.0; }
};

struct LiftResult {
  CorrespondenceSet set;
  std::size_t dropped = 0;
};

/// Lifts patch matches to 3D pairs. Q is the back-projected query patch
/// center at the median positive depth inside the patch; P is the template
/// XYZ (object frame) at the reference patch center. Pairs without valid
/// depth or XYZ are dropped and counted.
LiftResult lift(const std::vector<PatchMatch>& matches, const PatchGrid& query_grid, const DepthMap& query_depth,
                const CameraModel& cam, const PatchGrid& reference_grid, const RgbXyzMap& reference_xyz);

}  // namespace pose6d
