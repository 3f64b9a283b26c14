#include "pose6d/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pose6d {

PatchGrid PatchGrid::covering(int width, int height, int stride) {
  if (stride < 1 || width < 1 || height < 1) throw std::invalid_argument("patch grid: invalid geometry");
  return {(height + stride - 1) / stride, (width + stride - 1) / stride, stride};
}

Eigen::Vector2i PatchGrid::center_pixel(int patch) const {
  const int r = patch / cols, c = patch % cols;
  return {c * stride + stride / 2, r * stride + stride / 2};
}

bool PatchGrid::matches_image(int width, int height) const {
  return (height + stride - 1) / stride == rows && (width + stride - 1) / stride == cols;
}

FeatureMap::FeatureMap(PatchGrid g, int c)
    : grid(g), channels(c), data(static_cast<std::size_t>(g.size()) * std::max(c, 0), 0.0f) {}

void FeatureMap::validate() const {
  if (grid.rows < 1 || grid.cols < 1 || channels < 1) throw std::invalid_argument("feature map: empty");
  if (data.size() != static_cast<std::size_t>(grid.size()) * channels) {
    throw std::invalid_argument("feature map: payload size mismatch");
  }
  for (float f : data) {
    if (!std::isfinite(f)) throw std::invalid_argument("feature map: non-finite entry");
  }
}

BinaryMask downsample_mask(const BinaryMask& mask, const PatchGrid& grid) {
  if (!grid.matches_image(mask.width, mask.height)) throw std::invalid_argument("downsample_mask: grid/image mismatch");
  BinaryMask out(grid.cols, grid.rows);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      int on = 0, total = 0;
      for (int v = r * grid.stride; v < std::min((r + 1) * grid.stride, mask.height); ++v) {
        for (int u = c * grid.stride; u < std::min((c + 1) * grid.stride, mask.width); ++u) {
          on += mask.at(u, v) != 0;
          ++total;
        }
      }
      out.at(c, r) = (2 * on >= total) ? 1 : 0;
    }
  }
  return out;
}

SimilarityMatrix::SimilarityMatrix(int query_patches, int reference_patches, std::vector<int> active_rows,
                                   std::vector<int> active_cols)
    : rows_(query_patches),
      cols_(reference_patches),
      active_rows_(std::move(active_rows)),
      active_cols_(std::move(active_cols)),
      row_slot_(query_patches, -1),
      col_slot_(reference_patches, -1),
      values_(active_rows_.size() * active_cols_.size(), 0.0) {
  for (std::size_t a = 0; a < active_rows_.size(); ++a) row_slot_[active_rows_[a]] = static_cast<int>(a);
  for (std::size_t b = 0; b < active_cols_.size(); ++b) col_slot_[active_cols_[b]] = static_cast<int>(b);
}

double SimilarityMatrix::at(int i, int j) const {
  const int a = row_slot_.at(i), b = col_slot_.at(j);
  if (a < 0 || b < 0) return 0.0;
  return compact(a, b);
}

SimilarityMatrix masked_similarity(const FeatureMap& fq, const BinaryMask& mq, const FeatureMap& fr,
                                   const BinaryMask& mr) {
  if (fq.channels != fr.channels) throw std::invalid_argument("masked_similarity: channel mismatch");
  const BinaryMask pq = downsample_mask(mq, fq.grid);
  const BinaryMask pr = downsample_mask(mr, fr.grid);

  std::vector<int> rows, cols;
  for (int i = 0; i < fq.grid.size(); ++i)
    if (pq.data[i]) rows.push_back(i);
  for (int j = 0; j < fr.grid.size(); ++j)
    if (pr.data[j]) cols.push_back(j);

  SimilarityMatrix s(fq.grid.size(), fr.grid.size(), rows, cols);
  const int c = fq.channels;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const float* q = fq.at(rows[a]);
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const float* r = fr.at(cols[b]);
      double dot = 0.0;
      for (int k = 0; k < c; ++k) dot += static_cast<double>(q[k]) * static_cast<double>(r[k]);
      s.compact(a, b) = dot;
    }
  }
  return s;
}

std::vector<PatchMatch> assign_nn(const SimilarityMatrix& s) {
  std::vector<PatchMatch> out;
  const auto& cols = s.active_cols();
  for (std::size_t a = 0; a < s.active_rows().size(); ++a) {
    double best = 0.0;
    int best_j = -1;
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double v = s.compact(a, b);
      if (v > best) {
        best = v;
        best_j = cols[b];
      }
    }
    if (best_j >= 0) out.push_back({s.active_rows()[a], best_j, best});
  }
  return out;
}

double CorrespondenceSet::total_weight() const {
  double w = 0.0;
  for (const auto& p : pairs) w += p.weight;
  return w;
}

LiftResult lift(const std::vector<PatchMatch>& matches, const PatchGrid& query_grid, const DepthMap& query_depth,
                const CameraModel& cam, const PatchGrid& reference_grid, const RgbXyzMap& reference_xyz) {
  if (!query_grid.matches_image(query_depth.width, query_depth.height) ||
      !reference_grid.matches_image(reference_xyz.width, reference_xyz.height)) {
    throw std::invalid_argument("lift: grid/image mismatch");
  }
  LiftResult out;
  std::vector<double> depths;
  for (const auto& m : matches) {
    const int r = m.query / query_grid.cols, c = m.query % query_grid.cols;
    depths.clear();
    for (int v = r * query_grid.stride; v < std::min((r + 1) * query_grid.stride, query_depth.height); ++v) {
      for (int u = c * query_grid.stride; u < std::min((c + 1) * query_grid.stride, query_depth.width); ++u) {
        const double z = query_depth.at(u, v);
        if (z > 0.0) depths.push_back(z);
      }
    }
    const Eigen::Vector2i rc = reference_grid.center_pixel(m.reference);
    const bool ref_ok = rc.x() < reference_xyz.width && rc.y() < reference_xyz.height &&
                        reference_xyz.is_valid(reference_xyz.index(rc.x(), rc.y()));
    if (depths.empty() || !ref_ok) {
      ++out.dropped;
      continue;
    }
    // Lower median.
    const auto mid = depths.begin() + (depths.size() - 1) / 2;
    std::nth_element(depths.begin(), mid, depths.end());
    const Eigen::Vector2i qc = query_grid.center_pixel(m.query);
    out.set.pairs.push_back({cam.backproject(qc.x(), qc.y(), *mid), reference_xyz.xyz[reference_xyz.index(rc.x(), rc.y())],
                             m.weight});
  }
  return out;
}

}  // namespace pose6d
