#include "pose6d/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pose6d {

namespace {
constexpr double kProbClamp = 1e-7;
}

void LossWeights::validate() const {
  for (double v : {lambda_pose, lambda_conf, lambda_mask, w_rotation, w_translation}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("loss weights must be finite and >= 0");
  }
  if (!(alpha_conf > 0.0) || !std::isfinite(alpha_conf)) throw std::invalid_argument("alpha_conf must be > 0");
}

double pose_loss(const Pose& gt, const Pose& current, const IncrementPrediction& inc, const LossWeights& w) {
  w.validate();
  const Pose next = apply_increment(current, inc);
  const double rot = (gt.rotation().matrix() - next.rotation().matrix()).norm();
  const double trans = (gt.translation() - next.translation()).norm();
  return w.w_rotation * rot + w.w_translation * trans;
}

double geodesic_error(const Pose& pred, const Pose& gt) {
  const double theta = angular_distance(pred.rotation(), gt.rotation());
  return std::numbers::sqrt2 * theta + (pred.translation() - gt.translation()).norm();
}

double confidence_loss(std::span<const double> errors, std::span<const double> confidences, const LossWeights& w) {
  w.validate();
  if (errors.size() != confidences.size()) throw std::invalid_argument("confidence_loss: length mismatch");
  if (errors.empty()) throw std::invalid_argument("confidence_loss: empty input");
  double sum = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double c = std::clamp(confidences[k], kProbClamp, 1.0);
    sum += c * errors[k] - w.alpha_conf * std::log(c);
  }
  return sum / static_cast<double>(errors.size());
}

BinaryMask occlusion_target(const BinaryMask& amodal, const BinaryMask& visible) {
  if (!amodal.same_shape(visible.width, visible.height)) throw std::invalid_argument("occlusion_target: shape mismatch");
  BinaryMask out(amodal.width, amodal.height);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = (amodal.data[i] && !visible.data[i]) ? 1 : 0;
  return out;
}

double mask_bce(const ProbabilityMap& pred, const BinaryMask& target) {
  if (!pred.same_shape(target.width, target.height)) throw std::invalid_argument("mask_bce: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("mask_bce: empty map");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred.data[i], kProbClamp, 1.0 - kProbClamp);
    sum += target.data[i] ? std::log(p) : std::log(1.0 - p);
  }
  return -sum / static_cast<double>(pred.size());
}

double total_loss(const LossParts& parts, const LossWeights& w) {
  w.validate();
  return w.lambda_pose * parts.pose + w.lambda_conf * parts.conf + w.lambda_mask * parts.mask;
}

}  // namespace pose6d
