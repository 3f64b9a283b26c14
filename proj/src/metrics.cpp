#include "pose6d/metrics.hpp"

#include "pose6d/spatial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pose6d {

void MetricConfig::validate() const {
  if (!(add_threshold_fraction > 0.0 && add_threshold_fraction < 1.0))
    throw std::invalid_argument("metrics: add_threshold_fraction must be in (0, 1)");
  if (ar_thresholds.empty()) throw std::invalid_argument("metrics: ar_thresholds must be nonempty");
  for (std::size_t i = 0; i < ar_thresholds.size(); ++i) {
    if (!(ar_thresholds[i] > 0.0) || (i > 0 && !(ar_thresholds[i] > ar_thresholds[i - 1])))
      throw std::invalid_argument("metrics: ar_thresholds must be positive and ascending");
  }
  if (max_points < 1) throw std::invalid_argument("metrics: max_points must be >= 1");
}

std::vector<Eigen::Vector3d> metric_points(const ObjectModel& model, std::size_t max_points) {
  if (model.size() == 0) throw std::invalid_argument("metrics: empty model");
  if (max_points < 1) throw std::invalid_argument("metrics: max_points must be >= 1");
  const std::size_t stride = (model.size() + max_points - 1) / max_points;
  std::vector<Eigen::Vector3d> out;
  out.reserve(model.size() / stride + 1);
  for (std::size_t i = 0; i < model.size(); i += stride) out.push_back(model.points()[i]);
  return out;
}

double add_error(std::span<const Eigen::Vector3d> points, const Pose& pred, const Pose& gt) {
  if (points.empty()) throw std::invalid_argument("add_error: empty point set");
  const Eigen::Matrix3d rp = pred.rotation().matrix(), rg = gt.rotation().matrix();
  double sum = 0.0;
  for (const auto& x : points) sum += ((rp * x + pred.translation()) - (rg * x + gt.translation())).norm();
  return sum / static_cast<double>(points.size());
}

double add_error(const ObjectModel& model, const Pose& pred, const Pose& gt, std::size_t max_points) {
  return add_error(metric_points(model, max_points), pred, gt);
}

double adds_error(std::span<const Eigen::Vector3d> points, const Pose& pred, const Pose& gt) {
  if (points.empty()) throw std::invalid_argument("adds_error: empty point set");
  const Eigen::Matrix3d rp = pred.rotation().matrix(), rg = gt.rotation().matrix();
  std::vector<Eigen::Vector3d> target(points.size());
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = -lo;
  for (std::size_t i = 0; i < points.size(); ++i) {
    target[i] = rg * points[i] + gt.translation();
    lo = lo.cwiseMin(target[i]);
    hi = hi.cwiseMax(target[i]);
  }
  // About 2 points per occupied cell on a surface sampling.
  const double extent = std::max((hi - lo).maxCoeff(), 1e-9);
  const double cell = extent / std::max(1.0, std::sqrt(static_cast<double>(points.size()) / 2.0));
  const NearestNeighborGrid grid(target, cell);
  double sum = 0.0;
  for (const auto& x : points) sum += grid.nearest(rp * x + pred.translation())->distance;
  return sum / static_cast<double>(points.size());
}

double adds_error(const ObjectModel& model, const Pose& pred, const Pose& gt, std::size_t max_points) {
  return adds_error(metric_points(model, max_points), pred, gt);
}

double add_accuracy(std::span<const double> errors, double diameter, const MetricConfig& cfg) {
  cfg.validate();
  if (errors.empty()) return 0.0;
  const double thr = cfg.add_threshold_fraction * diameter;
  std::size_t ok = 0;
  for (double e : errors) ok += e < thr;
  return 100.0 * static_cast<double>(ok) / static_cast<double>(errors.size());
}

double threshold_recall(std::span<const double> errors, double diameter, const MetricConfig& cfg) {
  cfg.validate();
  if (errors.empty()) return 0.0;
  double sum = 0.0;
  for (double t : cfg.ar_thresholds) {
    std::size_t ok = 0;
    for (double e : errors) ok += e < t * diameter;
    sum += static_cast<double>(ok) / static_cast<double>(errors.size());
  }
  return sum / static_cast<double>(cfg.ar_thresholds.size());
}

double average_recall(double vsd, double mssd, double mspd) {
  for (double r : {vsd, mssd, mspd}) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("average_recall: recalls must be in [0, 1]");
  }
  return (vsd + mssd + mspd) / 3.0;
}

}  // namespace pose6d
