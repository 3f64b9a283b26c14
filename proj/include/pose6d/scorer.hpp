#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/matcher.hpp"

#include <utility>
#include <vector>

namespace pose6d {

struct ScoreConfig {
  /// Gaussian bandwidth in meters.
  double bandwidth = 0.01;
  int top_k = 7;

  void validate() const;
  /// Diameter-relative default bandwidth (0.1 D).
  static double default_bandwidth(double diameter) { return 0.1 * diameter; }
};

struct ScoredHypothesis {
  Rotation rotation;
  double score = 0.0;
  int correspondence_count = 0;
  /// Position in the full hypothesis list.
  int source_index = -1;
};

/// Weighted centroids (P_bar, Q_bar). Throws std::invalid_argument when the
/// weights sum to zero.
std::pair<Eigen::Vector3d, Eigen::Vector3d> weighted_centroids(const CorrespondenceSet& c);

/// E = sum_i w_i exp(-|(P_i - P_bar) - (Q_i - Q_bar)|^2 / (2 sigma^2)).
/// The sets are compared as given: callers wanting a rotation hypothesis
/// applied pass P_i already expressed in that hypothesis' view.
double rigidity_score(const CorrespondenceSet& c, const ScoreConfig& cfg);

/// Rotates every P_i into the hypothesis view, then scores. Returns 0 for an
/// unusable set.
double score_rotation(const Rotation& r, const CorrespondenceSet& c, const ScoreConfig& cfg);

/// Descending by score, ties by input order; at most top_k entries.
std::vector<ScoredHypothesis> select_top_k(const std::vector<ScoredHypothesis>& scored, const ScoreConfig& cfg);

/// Back-projects the per-axis lower-median mask pixel at the lower-median
/// positive depth inside the mask. Throws std::invalid_argument for an empty
/// mask or a mask without valid depth.
Eigen::Vector3d estimate_translation(const BinaryMask& mask, const DepthMap& depth, const CameraModel& cam);

}  // namespace pose6d
