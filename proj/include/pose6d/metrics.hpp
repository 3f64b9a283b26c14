#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/sampler.hpp"

#include <functional>
#include <span>
#include <vector>

namespace pose6d {

struct MetricConfig {
  double add_threshold_fraction = 0.1;
  /// Thresholds as fractions of the diameter.
  std::vector<double> ar_thresholds{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  /// Maximum number of model points used by the errors.
  std::size_t max_points = 10000;

  /// Throws std::invalid_argument unless 0 < fraction < 1 and the
  /// thresholds are nonempty, positive and strictly ascending.
  void validate() const;
};

/// Deterministic stride subsample down to at most max_points points.
std::vector<Eigen::Vector3d> metric_points(const ObjectModel& model, std::size_t max_points = 10000);

/// Mean distance between corresponding model points under the two poses.
double add_error(const ObjectModel& model, const Pose& pred, const Pose& gt, std::size_t max_points = 10000);
double add_error(std::span<const Eigen::Vector3d> points, const Pose& pred, const Pose& gt);

/// Mean distance from each predicted point to the nearest ground-truth point.
double adds_error(const ObjectModel& model, const Pose& pred, const Pose& gt, std::size_t max_points = 10000);
double adds_error(std::span<const Eigen::Vector3d> points, const Pose& pred, const Pose& gt);

/// Percentage of errors strictly below fraction * diameter.
double add_accuracy(std::span<const double> errors, double diameter, const MetricConfig& cfg = {});

/// Recall averaged over thresholds: mean over t of the fraction of errors
/// strictly below t * diameter.
double threshold_recall(std::span<const double> errors, double diameter, const MetricConfig& cfg = {});

/// Mean of the three component recalls. Throws std::invalid_argument for
/// values outside [0, 1].
double average_recall(double vsd, double mssd, double mspd);

}  // namespace pose6d
