#include "pose6d/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pose6d {

void ScoreConfig::validate() const {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("score: bandwidth must be positive");
  if (top_k < 1) throw std::invalid_argument("score: top_k must be >= 1");
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> weighted_centroids(const CorrespondenceSet& c) {
  double total = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero(), q = Eigen::Vector3d::Zero();
  for (const auto& pair : c.pairs) {
    if (pair.weight < 0.0) throw std::invalid_argument("correspondences: negative weight");
    total += pair.weight;
    p += pair.weight * pair.reference;
    q += pair.weight * pair.query;
  }
  if (!(total > 0.0)) throw std::invalid_argument("correspondences: weights sum to zero");
  return {p / total, q / total};
}

double rigidity_score(const CorrespondenceSet& c, const ScoreConfig& cfg) {
  cfg.validate();
  const auto [p_bar, q_bar] = weighted_centroids(c);
  const double denom = 2.0 * cfg.bandwidth * cfg.bandwidth;
  double e = 0.0;
  for (const auto& pair : c.pairs) {
    const double r2 = ((pair.reference - p_bar) - (pair.query - q_bar)).squaredNorm();
    e += pair.weight * std::exp(-r2 / denom);
  }
  return e;
}

double score_rotation(const Rotation& r, const CorrespondenceSet& c, const ScoreConfig& cfg) {
  if (!c.usable()) return 0.0;
  CorrespondenceSet view = c;
  for (auto& pair : view.pairs) pair.reference = r * pair.reference;
  return rigidity_score(view, cfg);
}

std::vector<ScoredHypothesis> select_top_k(const std::vector<ScoredHypothesis>& scored, const ScoreConfig& cfg) {
  cfg.validate();
  std::vector<ScoredHypothesis> out = scored;
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  if (out.size() > static_cast<std::size_t>(cfg.top_k)) out.resize(cfg.top_k);
  return out;
}

namespace {

template <typename T>
T lower_median(std::vector<T>& v) {
  const auto mid = v.begin() + (v.size() - 1) / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

Eigen::Vector3d estimate_translation(const BinaryMask& mask, const DepthMap& depth, const CameraModel& cam) {
  if (!mask.same_shape(depth.width, depth.height)) throw std::invalid_argument("estimate_translation: shape mismatch");
  std::vector<int> us, vs;
  std::vector<double> zs;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (!mask.at(u, v)) continue;
      us.push_back(u);
      vs.push_back(v);
      if (depth.at(u, v) > 0.0) zs.push_back(depth.at(u, v));
    }
  }
  if (us.empty()) throw std::invalid_argument("estimate_translation: empty mask");
  if (zs.empty()) throw std::invalid_argument("estimate_translation: no valid depth inside the mask");
  return cam.backproject(lower_median(us), lower_median(vs), lower_median(zs));
}

}  // namespace pose6d
